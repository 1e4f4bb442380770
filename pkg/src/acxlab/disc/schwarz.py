"""Subsolutions on the disc: f = K f* + T f_zbar, interior Hoelder bounds and
non-tangential boundary limits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..limits import LIMIT_TOL, LimitVerdict, judge
from .cauchy import CauchyGreen, cauchy_integral
from .grid import BoundaryTrace, DiscGrid, RadialSpectral, dbar_grid

DEFAULT_P = 4.0

# smooth probes used by refinement studies
SMOOTH_SAMPLES = {
    "exp_mixed": lambda z: np.exp(z + np.conj(z) / 2),
    "zbar_plus_z2": lambda z: np.conj(z) + 0.3 * z ** 2,
    "cubic_mix": lambda z: z * np.abs(z) ** 2 + np.sin(np.conj(z)),
}


@dataclass
class Decomposition:
    f: DiscGrid
    g: DiscGrid  # f - T f_zbar, holomorphic
    tpart: DiscGrid
    transform: CauchyGreen

    def g_trace(self, m, f_boundary=None):
        """Boundary values of g; ``f_boundary`` maps unit-circle points to f."""
        w = np.exp(2j * np.pi * np.arange(m) / m)
        fb = f_boundary(w) if f_boundary is not None else RadialSpectral(self.f)(w)
        return BoundaryTrace(fb - self.transform(w))

    def dbar_residual(self):
        return dbar_grid(self.g).sup(interior_only=True)


def decompose_subsolution(f: DiscGrid) -> Decomposition:
    T = CauchyGreen(dbar_grid(f))
    tpart = T.on_grid()
    return Decomposition(f, f - tpart, tpart, T)


def generalized_cauchy_error(f, n_r=256, n_theta=128, m=1024, r_max=0.5):
    """sup over nodes with |zeta| <= r_max of |f - K f* - T f_zbar|."""
    grid = DiscGrid.from_function(f, n_r, n_theta)
    T = CauchyGreen(dbar_grid(grid))
    K = cauchy_integral(BoundaryTrace.from_function(f, m))
    Z = grid.nodes
    mask = np.abs(Z) <= r_max
    err = grid.values[mask] - K(Z[mask]) - T.on_grid().values[mask]
    return float(np.max(np.abs(err)))


def _evaluator(f):
    return RadialSpectral(f) if isinstance(f, DiscGrid) else f


def stolz_half_angle(d, alpha):
    """Largest angular offset of a point at depth 1 - |zeta| = d in the Stolz region."""
    c = 1.0 - (alpha ** 2 - 1.0) * d * d / (2.0 * (1.0 - d))
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def stolz_samples(theta0, alpha, d, count):
    phi_max = 0.98 * stolz_half_angle(d, alpha)
    phi = np.linspace(-phi_max, phi_max, count)
    return (1.0 - d) * np.exp(1j * (theta0 + phi))


def nontangential_limit_estimate(f, theta0, alpha, ks=range(3, 15), per_scale=9, tol=LIMIT_TOL,
                                 radial_only=False) -> LimitVerdict:
    """Cauchy test over {|zeta - e^{i theta0}| < alpha (1 - |zeta|)} at depths 2^-k."""
    if not alpha > 1:
        raise ValueError("aperture must exceed 1")
    ev = _evaluator(f)
    scales, samples, wit = [], [], []
    for k in ks:
        d = 2.0 ** -k
        pts = (np.array([(1 - d) * np.exp(1j * theta0)]) if radial_only
               else stolz_samples(theta0, alpha, d, per_scale))
        vals = np.asarray(ev(pts), dtype=complex).reshape(len(pts), -1)[:, 0]
        scales.append(d)
        samples.append(vals)
        wit.append(pts[0])
    return judge(scales, samples, tol=tol, witnesses=wit)


@dataclass
class HolderReport:
    constant: float
    pair: tuple
    sup_norm: float
    lp_norm: float
    p: float


def holder_check(f: DiscGrid, p=DEFAULT_P, r=0.5, pairs=10_000, seed=0) -> HolderReport:
    """Empirical constant of |f(a) - f(b)| <= C (|f|_inf + |f_zbar|_p) |a - b|^(1 - 2/p) on rD."""
    if not p > 2:
        raise ValueError("p must exceed 2")
    if not 0 < r < 1:
        raise ValueError("radius must lie in (0, 1)")
    ev = RadialSpectral(f)
    sup = f.sup()
    lp = dbar_grid(f).lp_norm(p)
    rng = np.random.default_rng(seed)

    def disc_points(count):
        rad = r * np.sqrt(rng.random(count))
        return rad * np.exp(2j * np.pi * rng.random(count))

    a, b = disc_points(pairs), disc_points(pairs)
    fa = ev(a).reshape(pairs, -1)
    fb = ev(b).reshape(pairs, -1)
    num = np.linalg.norm(fa - fb, axis=1)
    den = (sup + lp) * np.abs(a - b) ** (1 - 2 / p)
    ratio = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    i = int(np.argmax(ratio))
    return HolderReport(float(ratio[i]), (complex(a[i]), complex(b[i])), sup, lp, p)
