"""Complex Hessian (Levi form) of real functions with respect to J."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chart import j_matrix
from .poly import c2r, r2c


@dataclass(frozen=True)
class DefiningFunction:
    """Real function rho with the domain locally given by {rho < 0}."""

    rho: Callable
    base: np.ndarray
    grad: Callable | None = None  # real gradient (..., 2n)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, dtype=complex))

    def __call__(self, z):
        return np.real(self.rho(np.asarray(z, dtype=complex)))

    def gradient(self, z, h=1e-6):
        z = np.asarray(z, dtype=complex)
        if self.grad is not None:
            return np.asarray(self.grad(z), dtype=float)
        x = c2r(z)
        g = np.empty(x.shape)
        for i in range(x.shape[-1]):
            e = np.zeros(x.shape[-1])
            e[i] = h
            g[..., i] = (self(r2c(x + e)) - self(r2c(x - e))) / (2 * h)
        return g


def model_defining_function(n):
    """rho_0 = Im z_n + |'z|^2 with base point 0 (the Siegel domain for n = 2)."""

    def rho(z):
        z = np.asarray(z, dtype=complex)
        return z[..., -1].imag + np.sum(np.abs(z[..., :-1]) ** 2, axis=-1)

    def grad(z):
        z = np.asarray(z, dtype=complex)
        g = np.zeros(z.shape[:-1] + (2 * n,))
        g[..., 0:2 * n - 2:2] = 2 * z[..., :-1].real
        g[..., 1:2 * n - 2:2] = 2 * z[..., :-1].imag
        g[..., -1] = 1.0
        return g

    return DefiningFunction(rho, np.zeros(n, complex), grad, name="rho0")


def _real_hessian(u, x, h):
    d = x.size
    H = np.empty((d, d))
    f0 = u(x)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h
        H[i, i] = (u(x + ei) - 2 * f0 + u(x - ei)) / h**2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = h
            H[i, j] = H[j, i] = (u(x + ei + ej) - u(x + ei - ej) - u(x - ei + ej) + u(x - ei - ej)) / (4 * h * h)
    return H


def _real_grad(u, x, h):
    d = x.size
    g = np.empty(d)
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        g[i] = (u(x + e) - u(x - e)) / (2 * h)
    return g


def levi_form(chart, u, p, V, h=None):
    """H_J(u)(p, V) = -(d J^* du)_p(X, JX) with X the constant extension of V.

    ``u`` takes complex points (n,) and returns a real number.  Derivatives of
    u and of J are central differences with step ``h`` (default 1e-4 * radius).
    """
    n = chart.n
    h = chart.h if h is None else h
    p = np.asarray(p, dtype=complex)
    x0 = c2r(p)
    ur = lambda x: float(np.real(u(r2c(x))))
    Hu = _real_hessian(ur, x0, h)
    gu = _real_grad(ur, x0, h)
    J = j_matrix(chart, p)
    dJ = np.empty((2 * n, 2 * n, 2 * n))  # dJ[i] = d J / d x_i
    for i in range(2 * n):
        e = np.zeros(2 * n)
        e[i] = h
        dJ[i] = (j_matrix(chart, r2c(x0 + e)) - j_matrix(chart, r2c(x0 - e))) / (2 * h)
    # theta_j = sum_k u_k J_kj ;  D[i, j] = d_i theta_j
    D = Hu @ J + np.einsum("k,ikj->ij", gu, dJ)
    dtheta = D - D.T
    v = c2r(np.asarray(V, dtype=complex))
    return float(-(v @ dtheta @ (J @ v)))


def levi_form_jst(u, p, V, h=1e-4):
    """4 sum u_{z_j zbar_k} V_j conj(V_k) from real second differences."""
    p = np.asarray(p, dtype=complex)
    ur = lambda x: float(np.real(u(r2c(x))))
    H = _real_hessian(ur, c2r(p), h)
    n = p.size
    uxx, uxy = H[0::2, 0::2], H[0::2, 1::2]
    uyx, uyy = H[1::2, 0::2], H[1::2, 1::2]
    # u_{z_j zbar_k} = (u_xx + u_yy + i(u_x_j y_k - u_y_j x_k)) / 4
    cplx = 0.25 * (uxx + uyy + 1j * (uxy - uyx))
    V = np.asarray(V, dtype=complex)
    return float(4 * np.real(V @ cplx @ V.conj()))


@dataclass
class PshVerdict:
    strict: bool
    min_value: float
    argmin: np.ndarray
    values: np.ndarray


def is_strictly_psh_at(chart, u, p, K=16, basis=None, eps=1e-8, seed=0, h=None):
    """Test H_J(u)(p, V) > eps on K unit directions.

    ``basis`` (k x n complex) restricts V to its complex span, e.g. the
    holomorphic tangent space of a boundary.  Directions are the basis vectors
    followed by seeded random unit combinations.
    """
    n = chart.n
    B = np.eye(n, dtype=complex) if basis is None else np.atleast_2d(np.asarray(basis, dtype=complex))
    rng = np.random.default_rng(seed)
    dirs = [b for b in B]
    dirs += [1j * b for b in B]
    while len(dirs) < K:
        c = rng.standard_normal(len(B)) + 1j * rng.standard_normal(len(B))
        dirs.append(c @ B)
    dirs = [d / np.linalg.norm(d) for d in dirs[:max(K, 1)]]
    vals = np.array([levi_form(chart, u, p, d, h=h) for d in dirs])
    i = int(np.argmin(vals))
    return PshVerdict(bool(vals[i] > eps), float(vals[i]), dirs[i], vals)
