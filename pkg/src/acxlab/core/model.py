"""Normalization, dilations and the homogeneous model structures."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ChartNotNormalized, NormTooLarge
from .chart import AlmostComplexChart, ball_samples, pushforward, NORM_MARGIN
from .poly import ChartTransformation, Poly

COEF_DROP = 1e-14


def nonisotropic_dilation(n, lam):
    """d_lam : ('z, z_n) -> (lam^-1/2 'z, lam^-1 z_n)."""
    scales = [lam ** -0.5] * (n - 1) + [1.0 / lam]
    return ChartTransformation.diagonal(scales, name=f"d[{lam:g}]")


def isotropic_dilation(n, lam):
    return ChartTransformation.diagonal([1.0 / lam] * n, name=f"h[{lam:g}]")


def dilate_chart(chart, lam, mode="isotropic"):
    """Push the structure forward by h_lam (isotropic) or d_lam (nonisotropic)."""
    if not lam > 0:
        raise ValueError("dilation scale must be positive")
    if lam == 1:
        return chart
    if mode == "isotropic":
        tf = isotropic_dilation(chart.n, lam)
        radius = chart.radius / lam
    elif mode == "nonisotropic":
        tf = nonisotropic_dilation(chart.n, lam)
        radius = chart.radius * min(lam ** -0.5, 1.0 / lam)
    else:
        raise ValueError(f"unknown dilation mode {mode!r}")
    return pushforward(chart, tf, radius=radius, name=f"{tf.name}_*({chart.name})")


def normalize_chart(chart):
    """Return (chart', tf) with A'(0) = 0 and dA'/dz(0) = 0.

    First the linear map z -> z - A(0) conj(z) kills A(0); then the quadratic
    map z -> z + C(z, conj z) with C_j = -sum_{k,m} dA_jk/dz_m(0) z_m conj(z_k)
    removes the z-linear part of A.
    """
    n = chart.n
    zero = np.zeros(n, complex)
    A0 = chart.A(zero)
    nrm = np.linalg.norm(A0, 2)
    if nrm >= 1:
        raise NormTooLarge(nrm, zero)
    if np.max(np.abs(A0)) > 0:
        lin = ChartTransformation.linear(np.eye(n), -A0, name="linear-step")
        stepped = pushforward(chart, lin, radius=chart.radius * (1 - nrm) / (1 + nrm))
    else:
        lin = ChartTransformation.identity(n)
        stepped = chart
    D = stepped.dz(zero)  # D[j, k, m] = dA_jk / dz_m (0)
    comps = []
    quadratic = False
    for j in range(n):
        c = Poly.var(n, j)
        for k in range(n):
            for m in range(n):
                coef = -D[j, k, m]
                if abs(coef) > COEF_DROP:
                    quadratic = True
                    c = c + Poly.var(n, m) * Poly.var(n, k, conj=True) * coef
        comps.append(c)
    if quadratic:
        tf = ChartTransformation(tuple(comps), name="quadratic-step").compose(lin)
    else:
        tf = lin
    if tf is lin and lin.name == "identity":
        return chart, tf
    # the quadratic step perturbs the ball by O(radius^2); shrink accordingly
    out = pushforward(chart, tf, name=f"normalized({chart.name})")
    return out, tf


def is_normalized(chart, tol0=1e-10, tol1=1e-6):
    zero = np.zeros(chart.n, complex)
    return (np.max(np.abs(chart.A(zero))) < tol0
            and np.max(np.abs(chart._fd(zero, conj=False))) < tol1)


@dataclass(frozen=True)
class ModelStructure:
    """Model data: l_j(conj 'w) = sum_m mu[j, m] conj(w_m), j, m < n - 1.

    The induced matrix A_0 vanishes except in its last row, which carries
    -l_1, ..., -l_{n-1}, 0.
    """

    n: int
    mu: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=complex).reshape(self.n - 1, self.n - 1)
        object.__setattr__(self, "mu", mu)

    def l(self, wbar):
        """Vector (l_1, ..., l_{n-1}) at conj('w) = wbar (shape (..., n-1))."""
        return np.asarray(wbar) @ self.mu.T

    def a0_polys(self):
        n = self.n
        polys = [[Poly(n) for _ in range(n)] for _ in range(n)]
        for j in range(n - 1):
            p = Poly(n)
            for m in range(n - 1):
                p = p + Poly.var(n, m, conj=True) * (-self.mu[j, m])
            polys[n - 1][j] = p
        return polys

    def A0(self, w):
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape[:-1] + (self.n, self.n), complex)
        out[..., -1, :-1] = -self.l(w[..., :-1].conj())
        return out

    def max_norm(self, radius):
        if self.n == 1:
            return 0.0
        return radius * np.linalg.norm(self.mu, 2)


def model_chart(model: ModelStructure, radius=1.0, margin=NORM_MARGIN):
    if model.max_norm(radius) >= 1 - margin:
        raise NormTooLarge(model.max_norm(radius), None,
                           f"model norm {model.max_norm(radius):.4g} on radius {radius} is not < 1")
    chart = AlmostComplexChart.from_polys(model.a0_polys(), radius, name="model")
    return chart


def model_limit(chart):
    """Model structure of a normalized chart: mu[j, m] = -dA_{n,j}/dzbar_m(0)."""
    n = chart.n
    if n < 2:
        raise ValueError("model structures need n >= 2")
    if not is_normalized(chart):
        raise ChartNotNormalized("A(0) = 0 and dA/dz(0) = 0 are required")
    D = chart.dzbar(np.zeros(n, complex))
    mu = -D[n - 1, : n - 1, : n - 1]
    mu = np.where(np.abs(mu) < 1e-13, 0.0, mu)
    return ModelStructure(n, mu)


def flatten_shear(a, sign=1.0):
    """(w1, w2) -> (w1, w2 + sign * a * conj(w1)^2 / 2) with its exact inverse."""
    c = sign * a / 2
    comps = (Poly.var(2, 0), Poly.var(2, 1) + Poly.var(2, 0, conj=True) ** 2 * c)

    def inv(w):
        w = np.asarray(w, dtype=complex)
        out = w.copy()
        out[..., 1] = w[..., 1] - c * w[..., 0].conj() ** 2
        return out

    return ChartTransformation(comps, inverse_fn=inv, name=f"shear[{sign:+g}]")


def dim2_flatten(model: ModelStructure, radius=0.5, samples=200, tol=1e-10):
    """Quadratic shear taking the n = 2 model structure to the standard one.

    Both signs of the shear are tried; the one whose pushforward vanishes on
    the sample set is returned.
    """
    if model.n != 2:
        raise ValueError("flattening is only available in dimension 2")
    a = complex(model.mu[0, 0])
    if a == 0:
        return ChartTransformation.identity(2)
    chart = model_chart(model, radius)
    pts = ball_samples(2, radius * 0.5, samples, seed=3)
    best = None
    for sign in (1.0, -1.0):
        tf = flatten_shear(a, sign)
        pushed = pushforward(chart, tf, radius=radius * 0.5)
        res = float(np.max(np.abs(pushed.A(tf(pts)))))
        if best is None or res < best[0]:
            best = (res, tf)
    if best[0] > tol:
        raise RuntimeError(f"no shear sign flattens the model (residual {best[0]:.3e})")
    return best[1]
