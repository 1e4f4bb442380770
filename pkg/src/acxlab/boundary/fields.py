"""Bounded test fields with bounded dbar_J derivative on the Siegel domain.

For a field F with Wirtinger gradients F_z, F_zbar the J-antiholomorphic part
along a disc obeys (F o z)_zbar = (F_zbar + F_z A(z)) conj(z)_zbar, so the
covector F_zbar + F_z A measures dbar_J F.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..core.chart import ball_samples
from ..core.levi import model_defining_function


@dataclass(frozen=True)
class ScalarField:
    name: str
    F: Callable
    F_z: Callable
    F_zbar: Callable
    bound: float
    dbar_bound: float
    continuous: bool = True  # continuous up to the boundary of the test domain
    params: dict = field(default_factory=dict)
    description: str = ""

    def __call__(self, z):
        return self.F(np.asarray(z, dtype=complex))

    def dbar_j(self, z, chart=None):
        """|F_zbar + F_z A(z)| pointwise."""
        z = np.asarray(z, dtype=complex)
        cov = self.F_zbar(z)
        if chart is not None:
            cov = cov + np.einsum("...i,...ij->...j", self.F_z(z), chart.A(z))
        return np.linalg.norm(cov, axis=-1)

    def catalog_entry(self):
        return {"name": self.name, "bound": self.bound, "dbar_bound": self.dbar_bound,
                "continuous": self.continuous, "params": self.params, "description": self.description}


def _zeros(z):
    return np.zeros(z.shape, complex)


def _unit(z, j):
    out = np.zeros(z.shape, complex)
    out[..., j] = 1.0
    return out


def constant(c=1.0 + 0.5j, n=2):
    c = complex(c)
    return ScalarField("const", lambda z: np.full(z.shape[:-1], c), _zeros, _zeros,
                       abs(c), 0.0, params={"re": c.real, "im": c.imag}, description="c")


def coordinate(j=0, n=2):
    return ScalarField(f"coord_z{j + 1}", lambda z: z[..., j], lambda z: _unit(z, j), _zeros,
                       1.0, 0.0, params={"j": j}, description=f"z_{j + 1} (unit ball)")


def conj_coordinate(j=0, n=2):
    return ScalarField(f"conj_z{j + 1}", lambda z: np.conj(z[..., j]), _zeros, lambda z: _unit(z, j),
                       1.0, 1.0, params={"j": j}, description=f"conj(z_{j + 1}) (unit ball)")


def _exp_inv(w):
    with np.errstate(over="ignore", invalid="ignore"):
        return np.exp(1j / w)


def exp_inverse(n=2):
    """exp(i / z_n): |.| = exp(Im z_n / |z_n|^2) <= 1 on Im z_n < 0."""
    def F(z):
        return _exp_inv(z[..., -1])

    def Fz(z):
        out = _zeros(z)
        w = z[..., -1]
        out[..., -1] = -1j / w ** 2 * _exp_inv(w)
        return out

    return ScalarField("exp_inv", F, Fz, _zeros, 1.0, 0.0, continuous=False,
                       description="exp(i/z_n), inner function of z_n")


def exp_inverse_plus_conj(n=2):
    """exp(i / z_2) + conj(z_1) / 2."""
    e = exp_inverse(n)

    def F(z):
        return e.F(z) + 0.5 * np.conj(z[..., 0])

    def Fzb(z):
        return 0.5 * _unit(z, 0)

    return ScalarField("exp_inv_plus_conj", F, e.F_z, Fzb, 1.5, 0.5, continuous=False,
                       description="exp(i/z_n) + conj(z_1)/2")


def power_i(n=2):
    """z_n^i on the principal branch; |.| = exp(-arg z_n) <= e^pi."""
    def F(z):
        w = z[..., -1]
        return np.exp(1j * np.log(w))

    def Fz(z):
        out = _zeros(z)
        w = z[..., -1]
        out[..., -1] = 1j * np.exp(1j * np.log(w)) / w
        return out

    return ScalarField("power_i", F, Fz, _zeros, float(np.exp(np.pi)), 0.0, continuous=False,
                       description="z_n^i, principal branch")


def damped_exp_inverse(n=2):
    """exp(i / z_n) / (1 + |z|^2); dbar bound max r/(1+r^2)^2 = 3 sqrt(3)/16."""
    def F(z):
        return _exp_inv(z[..., -1]) / (1 + np.sum(np.abs(z) ** 2, axis=-1))

    def Fz(z):
        q = 1 + np.sum(np.abs(z) ** 2, axis=-1)
        e = _exp_inv(z[..., -1])
        out = -(e / q ** 2)[..., None] * np.conj(z)
        out[..., -1] += -1j / z[..., -1] ** 2 * e / q
        return out

    def Fzb(z):
        q = 1 + np.sum(np.abs(z) ** 2, axis=-1)
        e = _exp_inv(z[..., -1])
        return -(e / q ** 2)[..., None] * z

    return ScalarField("damped_exp_inv", F, Fz, Fzb, 1.0, 3 * np.sqrt(3) / 16, continuous=False,
                       description="exp(i/z_n) / (1 + |z|^2)")


def catalog(n=2):
    return {f.name: f for f in (constant(n=n), coordinate(0, n), conj_coordinate(0, n),
                                 exp_inverse(n), exp_inverse_plus_conj(n), power_i(n), damped_exp_inverse(n))}


@dataclass
class BoundCheck:
    name: str
    max_value: float
    max_dbar: float
    passed: bool


def siegel_samples(n=2, count=4000, seed=0):
    """Points of {Im z_n + |'z|^2 < 0} in the unit ball, half of them close to the boundary."""
    rho = model_defining_function(n)
    rng = np.random.default_rng(seed)
    z = ball_samples(n, 1.0, 4 * count, seed=seed, include_boundary=False)
    z = z[rho(z) < 0]
    near = z.copy()
    # push half the points toward the boundary along Im z_n
    t = rng.random(len(near)) ** 6
    near[:, -1] = near[:, -1].real + 1j * (-np.sum(np.abs(near[:, :-1]) ** 2, axis=-1) + rho(near) * t)
    near = near[(rho(near) < 0) & (np.linalg.norm(near, axis=-1) < 1)]
    return np.concatenate([z[: count // 2], near[: count // 2]])


def check_bounds(field_: ScalarField, samples, chart=None, slack=1e-9):
    vals = np.abs(field_(samples))
    db = field_.dbar_j(samples, chart)
    ok = bool(np.all(np.isfinite(vals)) and np.max(vals) <= field_.bound * (1 + slack)
              and np.max(db) <= field_.dbar_bound * (1 + slack) + slack)
    return BoundCheck(field_.name, float(np.max(vals)), float(np.max(db)), ok)


def load_catalog(n=2, samples=None):
    """Catalog with declared bounds verified on sampled Siegel points."""
    cat = catalog(n)
    pts = siegel_samples(n) if samples is None else samples
    for f in cat.values():
        chk = check_bounds(f, pts)
        if not chk.passed:
            raise ValueError(f"field {f.name} violates its declared bounds: {chk}")
    return cat
