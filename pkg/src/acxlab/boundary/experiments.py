"""Boundary-limit experiments on model domains.

A region experiment samples the approach region at depths 2^-k and applies
the oscillation test of ``acxlab.limits``; the curve experiment follows the
inward normal ray, which lies in a complex line transverse to the boundary.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..core.levi import DefiningFunction, model_defining_function
from ..core.poly import c2r, r2c
from ..disc.grid import DiscGrid, dbar_grid, dz_grid
from ..errors import OutsideDomain
from ..limits import LIMIT_TOL, LimitVerdict, judge
from .fields import ScalarField
from .regions import ApproachRegion, sample_approach

DEFAULT_KS = tuple(range(3, 29))
CURVE_POINTS = 8
TRANSVERSAL_MIN = 0.1


# -- pullbacks ------------------------------------------------------------------

@dataclass
class PullbackReport:
    values: DiscGrid
    sup_dbar: float
    dbar_bound: float
    c1_bound: float
    limit: float
    certified: bool


def pullback_subsolution(field_: ScalarField, disc, chart=None, slack=0.1) -> PullbackReport:
    """F o h on the disc grid with the bound |dbar(F o h)| <= C * B * (1 + slack).

    ``disc`` is a DiscSolution or a DiscGrid of points; B = sup |h_zeta| is
    the part of the C^1 norm of h entering the chain rule.
    """
    z = disc.z if hasattr(disc, "z") else disc
    vals = z.values
    if not np.all(np.isfinite(field_(vals))):
        raise OutsideDomain("disc image leaves the field domain")
    comp = DiscGrid(field_(vals))
    sup = dbar_grid(comp).sup(interior_only=True)
    B = dz_grid(z).sup(interior_only=True)
    lim = field_.dbar_bound * B * (1 + slack)
    # floor for the differentiation error on exactly holomorphic compositions
    floor = 1e-8 * max(1.0, comp.sup())
    return PullbackReport(comp, float(sup), field_.dbar_bound, float(B), float(lim), bool(sup <= lim + floor))


# -- curves -----------------------------------------------------------------------

def normal_curve(region: ApproachRegion):
    """t -> p + t nu with nu the inward unit normal."""
    x0 = c2r(region.p)
    nu = region.inward_normal

    def tau(t):
        t = np.asarray(t, dtype=float)
        return r2c(x0 + t[..., None] * nu)

    tau.tangent = nu
    return tau


def transversality(region: ApproachRegion, tangent):
    t = np.asarray(tangent, float)
    return float(abs(t @ region.inward_normal) / np.linalg.norm(t))


def curve_samples(curve, ks=DEFAULT_KS, per_shell=CURVE_POINTS):
    """Per dyadic shell t in [2^-(k+1), 2^-k], ``per_shell`` parameter values."""
    scales, pts = [], []
    for k in ks:
        t = 2.0 ** -k * np.linspace(0.5, 1.0, per_shell)
        scales.append(2.0 ** -k)
        pts.append(curve(t))
    return scales, pts


def curve_verdict(field_: ScalarField, curve, ks=DEFAULT_KS, tol=LIMIT_TOL, per_shell=CURVE_POINTS):
    scales, pts = curve_samples(curve, ks, per_shell)
    return judge(scales, [field_(p) for p in pts], tol=tol, witnesses=[p[0] for p in pts])


def tangential_curve(n=2):
    """('0, t - i t^2): approaches 0 tangentially, outside every admissible region."""
    def tau(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (n,), complex)
        out[..., -1] = t - 1j * t ** 2
        return out
    return tau


# -- region experiments -----------------------------------------------------------

@dataclass
class ExperimentResult:
    region: LimitVerdict
    curve: LimitVerdict
    agree: bool
    max_abs: float
    bound_ok: bool
    point: np.ndarray = field(default=None)

    def row(self):
        v = self.region.value
        return {"status": self.region.status,
                "limit_re": float("nan") if v is None else float(np.real(v)),
                "limit_im": float("nan") if v is None else float(np.imag(v)),
                "curve_status": self.curve.status,
                "tail_osc": self.region.tail_oscillation,
                "agree": self.agree,
                "osc": [r["osc"] for r in self.region.table]}


def verdicts_agree(region_v: LimitVerdict, curve_v: LimitVerdict, tol=LIMIT_TOL):
    if curve_v.status == "limit" and region_v.status == "no-limit":
        return False
    if curve_v.status == "limit" and region_v.status == "limit":
        return abs(curve_v.value - region_v.value) < tol
    return True


def admissible_limit_experiment(field_: ScalarField, region: ApproachRegion, ks=DEFAULT_KS, count=16,
                                seed=0, rng=None, tol=LIMIT_TOL, curve=None) -> ExperimentResult:
    curve = normal_curve(region) if curve is None else curve
    tangent = getattr(curve, "tangent", None)
    if tangent is not None and transversality(region, tangent) < TRANSVERSAL_MIN:
        raise ValueError("designated curve is not transverse to the boundary")
    samples = sample_approach(region, count=count, seed=seed, ks=ks, rng=rng)
    vals = [field_(z) for z in samples.points]
    mx = float(max(np.max(np.abs(v)) for v in vals))
    rv = judge(samples.scales, vals, tol=tol, witnesses=[z[0] for z in samples.points])
    cv = curve_verdict(field_, curve, ks, tol)
    return ExperimentResult(rv, cv, verdicts_agree(rv, cv, tol), mx,
                            bool(mx <= field_.bound * (1 + 1e-9)), region.p)


# -- Fatou scans ------------------------------------------------------------------

def siegel_edge_grid(nx=32, ny=32, x1=(0.05, 0.25), x2=(0.2, 0.6)):
    """Points (x1, x2 - i x1^2) of the totally real piece {Im z_1 = 0, Re z_2 = x2} of the Siegel boundary."""
    a = np.linspace(x1[0], x1[1], nx)
    b = np.linspace(x2[0], x2[1], ny)
    A, B = np.meshgrid(a, b, indexing="ij")
    pts = np.stack([A.ravel() + 0j, B.ravel() - 1j * A.ravel() ** 2], axis=-1)
    return pts


@dataclass
class FatouResult:
    points: np.ndarray
    results: list
    fraction: float
    alpha: float

    def statuses(self):
        return [r.region.status for r in self.results]


def fatou_scan(field_: ScalarField, points, alpha=1.0, ks=DEFAULT_KS, count=16, seed=0,
               threads=1, rho: DefiningFunction | None = None, tol=LIMIT_TOL, chart=None) -> FatouResult:
    """Admissible-limit experiment at every edge point; per-point RNG streams are
    spawned from ``seed`` so results do not depend on ``threads``."""
    points = np.asarray(points, dtype=complex)
    rho = model_defining_function(points.shape[1]) if rho is None else rho
    children = np.random.SeedSequence(seed).spawn(len(points))

    def run(i):
        region = ApproachRegion(points[i], alpha, rho, "admissible", chart)
        return admissible_limit_experiment(field_, region, ks, count, rng=np.random.default_rng(children[i]),
                                           tol=tol)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(run, range(len(points))))
    else:
        results = [run(i) for i in range(len(points))]
    frac = float(np.mean([r.region.status == "limit" for r in results])) if results else float("nan")
    return FatouResult(points, results, frac, alpha)
