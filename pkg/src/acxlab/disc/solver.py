"""J-holomorphic discs: Picard solver, residuals and the model disc families.

A disc z : D -> C^n is J-holomorphic when z_zbar = A(z) conj(z_zeta).  Given a
holomorphic datum phi the solver iterates z <- phi + T[A(z) conj(z_zeta)].
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..core.chart import AlmostComplexChart
from ..core.levi import levi_form
from ..core.model import ModelStructure
from ..errors import AnchorOutsideCone, IterateLeftChart, NoConvergence, OutsideDomain
from .cauchy import CauchyGreen
from .grid import DiscGrid, dbar_grid, dz_grid, grid_to_csv, nodes, radii

DEFAULT_NR = 64
DEFAULT_NT = 64


@dataclass(frozen=True)
class HolomorphicDatum:
    """phi(zeta) = sum_d coeffs[d] zeta^d with coeffs of shape (degree + 1, n)."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=complex))
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self):
        return self.coeffs.shape[1]

    @classmethod
    def from_point_direction(cls, p, V):
        return cls(np.stack([np.asarray(p, complex), np.asarray(V, complex)]))

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        out = np.zeros(zeta.shape + (self.n,), complex)
        for c in self.coeffs[::-1]:
            out = out * zeta[..., None] + c
        return out

    def grid(self, n_r=DEFAULT_NR, n_theta=DEFAULT_NT):
        return DiscGrid(self(nodes(n_r, n_theta)))

    def to_dict(self):
        return {"coeffs": [[[float(v.real), float(v.imag)] for v in row] for row in self.coeffs]}


@dataclass
class DiscSolution:
    z: DiscGrid
    residual: float
    iterations: int
    datum: HolomorphicDatum
    history: list = field(default_factory=list)

    def sidecar(self):
        return {"residual": self.residual, "iterations": self.iterations,
                "history": list(self.history), "datum": self.datum.to_dict()}

    def to_csv(self):
        return grid_to_csv(self.z, meta={"kind": "disc"})

    def sidecar_json(self):
        return json.dumps(self.sidecar(), sort_keys=True, indent=1)

    def c1_norm(self):
        """sup |z| + sup |z_zeta| + sup |z_zbar| over the grid."""
        v = self.z
        return v.sup() + dz_grid(v).sup() + dbar_grid(v).sup()


def _check_inside(chart, z, exc):
    nrm = np.linalg.norm(z, axis=-1)
    if np.max(nrm) >= chart.radius:
        raise exc(f"disc reaches |z| = {np.max(nrm):.6g} outside the chart ball of radius {chart.radius:g}")


def equation_defect(chart, z, z_zeta, z_zbar):
    """|z_zbar - A(z) conj(z_zeta)| pointwise; arrays (..., n)."""
    A = chart.A(z)
    d = z_zbar - np.einsum("...ij,...j->...i", A, np.conj(z_zeta))
    return np.linalg.norm(d, axis=-1)


def disc_residual(chart, z) -> float:
    """Sup over interior nodes of the holomorphy defect.

    ``z`` is a DiscGrid (derivatives by the polar stencil) or a closed-form disc
    exposing ``grid``, ``d_zeta`` and ``d_zbar`` (analytic derivatives).
    """
    if isinstance(z, DiscGrid):
        vals = z.values
        _check_inside(chart, vals, OutsideDomain)
        d = equation_defect(chart, vals, dz_grid(z).values, dbar_grid(z).values)
        return float(np.max(d[:-1]))
    Z = nodes(DEFAULT_NR, DEFAULT_NT)
    vals = z(Z)
    _check_inside(chart, vals, OutsideDomain)
    return float(np.max(equation_defect(chart, vals, z.d_zeta(Z), z.d_zbar(Z))))


def picard_step(chart, datum_grid, z: DiscGrid) -> DiscGrid:
    rhs = np.einsum("...ij,...j->...i", chart.A(z.values), np.conj(dz_grid(z).values))
    return datum_grid + CauchyGreen(DiscGrid(rhs)).on_grid()


def solve_disc(chart: AlmostComplexChart, datum: HolomorphicDatum, tol=1e-10, max_iter=50,
               n_r=DEFAULT_NR, n_theta=DEFAULT_NT, initial=None) -> DiscSolution:
    if datum.n != chart.n:
        raise ValueError("datum dimension does not match the chart")
    phi = datum.grid(n_r, n_theta)
    z = phi if initial is None else initial
    history = []
    for it in range(1, max_iter + 1):
        _check_inside(chart, z.values, IterateLeftChart)
        z = picard_step(chart, phi, z)
        _check_inside(chart, z.values, IterateLeftChart)
        res = disc_residual(chart, z)
        history.append(res)
        if res < tol:
            return DiscSolution(z, res, it, datum, history)
        if not np.isfinite(res):
            break
    raise NoConvergence(f"residual {history[-1]:.3e} after {len(history)} iterations", history)


def contraction_ratios(history):
    h = np.asarray(history, float)
    return h[1:] / h[:-1]


# -- model discs --------------------------------------------------------------

def family_coefficient(model: ModelStructure, a):
    """c with z_n = z_n0 + c zbar^2 + conj(c) zeta^2 solving the model equation for 'z = a zeta."""
    a = np.asarray(a, complex)
    return complex(-0.5 * np.sum(np.conj(a) * model.l(np.conj(a))))


@dataclass(frozen=True)
class DiscFamilyParams:
    v: np.ndarray
    anchor: complex
    c: complex
    radius: float
    alpha: float | None = None


@dataclass(frozen=True)
class FamilyDisc:
    """'z = radius * v * zeta, z_n = anchor + c zbar^2 + conj(c) zeta^2."""

    model: ModelStructure
    params: DiscFamilyParams

    @property
    def a(self):
        return self.params.radius * self.params.v

    def __call__(self, zeta):
        zeta = np.asarray(zeta, complex)
        p = self.params
        out = np.empty(zeta.shape + (self.model.n,), complex)
        out[..., :-1] = zeta[..., None] * self.a
        out[..., -1] = p.anchor + p.c * np.conj(zeta) ** 2 + np.conj(p.c) * zeta ** 2
        return out

    def d_zeta(self, zeta):
        zeta = np.asarray(zeta, complex)
        out = np.zeros(zeta.shape + (self.model.n,), complex)
        out[..., :-1] = self.a
        out[..., -1] = 2 * np.conj(self.params.c) * zeta
        return out

    def d_zbar(self, zeta):
        zeta = np.asarray(zeta, complex)
        out = np.zeros(zeta.shape + (self.model.n,), complex)
        out[..., -1] = 2 * self.params.c * np.conj(zeta)
        return out

    def grid(self, n_r=DEFAULT_NR, n_theta=DEFAULT_NT):
        return DiscGrid(self(nodes(n_r, n_theta)))

    def datum(self):
        """Holomorphic part phi; the solver adds c zbar^2 = T[2 c zbar]."""
        n = self.model.n
        coeffs = np.zeros((3, n), complex)
        coeffs[0, -1] = self.params.anchor
        coeffs[1, :-1] = self.a
        coeffs[2, -1] = np.conj(self.params.c)
        return HolomorphicDatum(coeffs)


def anchor_in_cone(anchor, alpha):
    """Admissible inequalities at ('0, anchor) for the model boundary point 0."""
    y = anchor.imag
    return y < 0 and abs(anchor) < (1 + alpha) * abs(y) and abs(anchor) ** 2 < alpha * abs(y)


def _family_admissible(model, v, anchor, s, alpha, probe):
    a = s * np.asarray(v, complex)
    c = family_coefficient(model, a)
    zn = anchor + c * np.conj(probe) ** 2 + np.conj(c) * probe ** 2
    w2 = np.abs(probe) ** 2 * float(np.sum(np.abs(a) ** 2))
    rho = zn.imag + w2
    if np.any(rho >= 0):
        return False
    return bool(np.all(np.abs(zn) < (1 + alpha) * np.abs(rho)) and np.all(w2 + np.abs(zn) ** 2 < alpha * np.abs(rho)))


def model_disc_family(model: ModelStructure, v, anchor, radius=None, alpha=2.0):
    """Closed-form model disc through ('0, anchor) in direction v.

    Without ``radius`` the largest parameter radius keeping the closed disc in
    the admissible region of aperture ``alpha`` is found by bisection; it scales
    like |Im anchor|^(1/2).
    """
    v = np.asarray(v, complex).reshape(model.n - 1)
    nv = np.linalg.norm(v)
    if abs(nv - 1) > 1e-12:
        raise ValueError("direction must be a unit vector")
    anchor = complex(anchor)
    if not anchor.imag < 0:
        raise ValueError("anchor must satisfy Im z_n < 0")
    if radius is None:
        if not anchor_in_cone(anchor, alpha):
            raise AnchorOutsideCone(f"anchor {anchor} violates the admissible inequalities for alpha={alpha}")
        probe = nodes(16, 32).ravel()
        probe = np.concatenate([probe, np.exp(2j * np.pi * np.arange(64) / 64)])
        lo, hi = 0.0, np.sqrt(abs(anchor.imag))
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if _family_admissible(model, v, anchor, mid, alpha, probe):
                lo = mid
            else:
                hi = mid
        radius = lo
    a = radius * v
    params = DiscFamilyParams(v, anchor, family_coefficient(model, a), float(radius), alpha)
    return FamilyDisc(model, params), params




def mobius_to_halfplane(xi):
    """Unit disc onto {Im w < 0}: xi -> -i (1 + xi) / (1 - xi)."""
    xi = np.asarray(xi, complex)
    return -1j * (1 + xi) / (1 - xi)


@dataclass(frozen=True)
class NormalDisc:
    """zeta -> ('0, w(zeta)) for the lower half-plane, truncated to |w| <= truncation."""

    n: int
    truncation: float = 4.0

    @property
    def scale(self):
        # mobius(s) = -i (1 + s)/(1 - s) has modulus R at s = (R - 1)/(R + 1)
        R = self.truncation
        return (R - 1) / (R + 1)

    def halfplane(self, w):
        w = np.asarray(w, complex)
        out = np.zeros(w.shape + (self.n,), complex)
        out[..., -1] = w
        return out

    def __call__(self, zeta):
        return self.halfplane(mobius_to_halfplane(self.scale * np.asarray(zeta, complex)))

    def d_zeta(self, zeta):
        s = self.scale
        xi = s * np.asarray(zeta, complex)
        out = np.zeros(xi.shape + (self.n,), complex)
        out[..., -1] = -2j * s / (1 - xi) ** 2
        return out

    def d_zbar(self, zeta):
        return np.zeros(np.shape(zeta) + (self.n,), complex)

    def grid(self, n_r=DEFAULT_NR, n_theta=DEFAULT_NT):
        return DiscGrid(self(nodes(n_r, n_theta)))


def transverse_normal_disc(model: ModelStructure, truncation=4.0):
    return NormalDisc(model.n, truncation)


@dataclass
class FamilyCover:
    model: ModelStructure
    discs: list
    alpha: float

    def distance(self, q, n_r=48, n_theta=96):
        """Smallest distance from q to the sampled images of the family."""
        q = np.asarray(q, complex)
        Z = np.concatenate([nodes(n_r, n_theta).ravel(), np.exp(2j * np.pi * np.arange(n_theta) / n_theta)])
        best = np.inf
        for d in self.discs:
            best = min(best, float(np.min(np.linalg.norm(d(Z) - q, axis=-1))))
        return best

    @property
    def radii(self):
        return np.array([d.params.radius for d in self.discs])


def unit_directions(m, count, seed=0):
    """Coordinate directions first, then seeded random unit vectors in C^m."""
    rng = np.random.default_rng(seed)
    out = [np.eye(m, dtype=complex)[i] for i in range(min(m, count))]
    while len(out) < count:
        v = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        out.append(v / np.linalg.norm(v))
    return out


def fill_admissible(model: ModelStructure, alpha, anchor, count=16, seed=0) -> FamilyCover:
    anchor = complex(anchor)
    if not anchor_in_cone(anchor, alpha):
        raise AnchorOutsideCone(f"anchor {anchor} violates the admissible inequalities for alpha={alpha}")
    discs = [model_disc_family(model, v, anchor, alpha=alpha)[0]
             for v in unit_directions(model.n - 1, count, seed)]
    return FamilyCover(model, discs, alpha)


# -- Levi form through discs --------------------------------------------------

def _even_fit(r, y, degree=3):
    """Coefficients of y ~ sum_i b_i r^(2i), i = 0..degree."""
    M = np.stack([r ** (2 * i) for i in range(degree + 1)], axis=1)
    return np.linalg.lstsq(M, y, rcond=None)[0]


@dataclass
class DiscLeviReport:
    laplacian: float
    center: np.ndarray
    tangent: np.ndarray
    direct: float

    @property
    def difference(self):
        return abs(self.laplacian - self.direct)

    @property
    def normalized_difference(self):
        """Difference in units of a unit tangent vector (both routes scale like |z_xi|^2)."""
        return self.difference / float(np.sum(np.abs(self.tangent) ** 2))


def levi_via_disc(chart, u, p, V, size=None, n_r=DEFAULT_NR, n_theta=DEFAULT_NT, rings=8, tol=1e-12):
    """Laplacian of u along a J-disc through p in direction V, compared with the Levi form.

    The disc solves the holomorphy equation with datum p + size * V zeta.  The
    Laplacian at the center comes from an even fit of angular means of u o z on
    the innermost rings; the direct Levi form is evaluated at the disc's own
    center and real tangent z_xi(0).
    """
    size = 0.05 * chart.radius if size is None else size
    datum = HolomorphicDatum.from_point_direction(p, size * np.asarray(V, complex))
    sol = solve_disc(chart, datum, tol=tol, n_r=n_r, n_theta=n_theta)
    r = radii(n_r)[:rings]
    zv = sol.z.values[:rings]
    uz = np.array([[float(np.real(u(zv[j, k]))) for k in range(n_theta)] for j in range(rings)])
    lap = 4.0 * _even_fit(r, uz.mean(axis=1))[1]
    modes = np.fft.fft(zv, axis=1) / n_theta  # (rings, n_theta, n)
    center = np.array([_even_fit(r, modes[:, 0, i])[0] for i in range(chart.n)])
    # mode +1 ~ z_zeta(0) r, mode -1 ~ z_zbar(0) r
    fz = np.array([_even_fit(r, modes[:, 1, i] / r)[0] for i in range(chart.n)])
    fzb = np.array([_even_fit(r, modes[:, -1, i] / r)[0] for i in range(chart.n)])
    tangent = fz + fzb
    direct = levi_form(chart, u, center, tangent)
    return DiscLeviReport(float(lap), center, tangent, float(direct))
