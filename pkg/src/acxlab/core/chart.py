"""Almost complex structures stored through their complex matrix A(z)."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import NormTooLarge, SingularDenominator
from .poly import ChartTransformation, Poly, _real_matrix, eval_matrix

FD_STEP = 1e-4  # relative to the chart radius
NORM_MARGIN = 1e-6


@dataclass(frozen=True)
class AlmostComplexChart:
    """Local representation of J on the ball |z| < radius.

    ``A`` maps points of shape (..., n) to matrices (..., n, n).  The optional
    ``dA_dz`` / ``dA_dzbar`` return (..., n, n, n) with the differentiation
    index last; without them central differences with step 1e-4 * radius are
    used.  ``polys`` keeps the coefficient table of polynomial charts.
    """

    n: int
    radius: float
    A: Callable
    dA_dz: Callable | None = None
    dA_dzbar: Callable | None = None
    polys: tuple | None = None
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    # construction -----------------------------------------------------------
    @classmethod
    def from_polys(cls, polys, radius, name="polynomial"):
        polys = tuple(tuple(row) for row in polys)
        n = len(polys)
        dz = tuple(tuple(tuple(p.d_z(m) for m in range(n)) for p in row) for row in polys)
        dzb = tuple(tuple(tuple(p.d_zbar(m) for m in range(n)) for p in row) for row in polys)

        def A(z):
            return eval_matrix(polys, z)

        def d3(table):
            def f(z):
                z = np.asarray(z, dtype=complex)
                return np.stack(
                    [np.stack([np.stack([q(z) for q in cell], -1) for cell in row], -2) for row in table],
                    -3,
                )
            return f

        return cls(n, float(radius), A, d3(dz), d3(dzb), polys=polys, name=name)

    @classmethod
    def from_entries(cls, n, radius, entries, name="polynomial"):
        """Build from rows {row, col, alpha, beta, re, im} (0-based row/col)."""
        polys = [[Poly(n) for _ in range(n)] for _ in range(n)]
        for e in entries:
            r, c = int(e["row"]), int(e["col"])
            if not (0 <= r < n and 0 <= c < n):
                raise ValueError(f"entry index ({r}, {c}) out of range for n={n}")
            alpha = list(e.get("alpha", [0] * n))
            beta = list(e.get("beta", [0] * n))
            if len(alpha) != n or len(beta) != n:
                raise ValueError("alpha/beta must have length n")
            coef = complex(e.get("re", 0.0), e.get("im", 0.0))
            polys[r][c] = polys[r][c] + Poly.monomial(n, alpha, beta, coef)
        return cls.from_polys(polys, radius, name=name)

    @classmethod
    def standard(cls, n, radius=1.0):
        return cls.from_polys([[Poly(n) for _ in range(n)] for _ in range(n)], radius, name="jst")

    @classmethod
    def from_json(cls, doc):
        if isinstance(doc, str):
            doc = json.loads(doc)
        return cls.from_entries(int(doc["n"]), float(doc["radius"]), doc.get("entries", []))

    def entries(self):
        if self.polys is None:
            raise ValueError("chart has no coefficient table")
        n = self.n
        out = []
        for r, row in enumerate(self.polys):
            for c, p in enumerate(row):
                for key in sorted(p.terms):
                    v = p.terms[key]
                    out.append({"row": r, "col": c, "alpha": list(key[:n]), "beta": list(key[n:]),
                                "re": float(v.real), "im": float(v.imag)})
        return out

    def to_json(self):
        return {"n": self.n, "radius": self.radius, "entries": self.entries()}

    # derivatives ------------------------------------------------------------
    @property
    def h(self):
        return FD_STEP * self.radius

    def _fd(self, z, conj):
        z = np.asarray(z, dtype=complex)
        h = self.h
        cols = []
        for m in range(self.n):
            e = np.zeros(self.n, complex)
            e[m] = h
            ax = (self.A(z + e) - self.A(z - e)) / (2 * h)
            ay = (self.A(z + 1j * e) - self.A(z - 1j * e)) / (2 * h)
            cols.append(0.5 * (ax + 1j * ay) if conj else 0.5 * (ax - 1j * ay))
        return np.stack(cols, axis=-1)

    def dz(self, z):
        return self.dA_dz(z) if self.dA_dz is not None else self._fd(z, conj=False)

    def dzbar(self, z):
        return self.dA_dzbar(z) if self.dA_dzbar is not None else self._fd(z, conj=True)

    def norm(self, z):
        return np.linalg.norm(self.A(z), ord=2, axis=(-2, -1))

    def with_radius(self, radius):
        return AlmostComplexChart(self.n, float(radius), self.A, self.dA_dz, self.dA_dzbar,
                                  self.polys, self.name, dict(self.meta))


@dataclass
class ValidationReport:
    passed: bool
    max_norm: float
    argmax: np.ndarray
    samples: int


def validate_chart(chart, samples, margin=NORM_MARGIN, raise_on_fail=True):
    """Check that the spectral norm of A stays below ``1 - margin`` on ``samples``."""
    pts = np.asarray(samples, dtype=complex).reshape(-1, chart.n)
    if np.any(np.linalg.norm(pts, axis=-1) > chart.radius * (1 + 1e-12)):
        raise ValueError("sample points must lie in the chart ball")
    norms = chart.norm(pts)
    i = int(np.argmax(norms))
    report = ValidationReport(bool(norms[i] < 1 - margin), float(norms[i]), pts[i], len(pts))
    if not report.passed and raise_on_fail:
        raise NormTooLarge(norms[i], pts[i])
    return report


def ball_samples(n, radius, count, seed=0, include_boundary=True):
    """Deterministic points of the closed ball (half of them on the sphere when requested)."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((count, 2 * n))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    rad = rng.random(count) ** (1.0 / (2 * n))
    if include_boundary:
        rad[: count // 2] = 1.0
    x *= radius * rad[:, None]
    return x[:, 0::2] + 1j * x[:, 1::2]


def jst_matrix(n):
    J = np.zeros((2 * n, 2 * n))
    for j in range(n):
        J[2 * j, 2 * j + 1] = -1.0
        J[2 * j + 1, 2 * j] = 1.0
    return J


def l_matrix(A):
    """Real matrix of v -> A conj(v)."""
    A = np.asarray(A, dtype=complex)
    return _real_matrix(np.zeros_like(A), A)


def j_matrix(chart, z):
    """Real 2n x 2n matrix of J at z, J = J_st (I - L)(I + L)^-1 with L v = A conj(v)."""
    A = np.asarray(chart.A(np.asarray(z, dtype=complex)))
    nrm = np.linalg.norm(A, 2)
    if nrm >= 1:
        raise NormTooLarge(nrm, z)
    L = l_matrix(A)
    I = np.eye(2 * chart.n)
    try:
        inv = np.linalg.inv(I + L)
    except np.linalg.LinAlgError as exc:
        raise NormTooLarge(nrm, z) from exc
    return jst_matrix(chart.n) @ (I - L) @ inv


def pushforward_matrix(A, P, Q):
    """Transformation rule A' = (P A + Q)(conj P + conj Q A)^-1, batched over leading axes."""
    num = P @ A + Q
    den = P.conj() + Q.conj() @ A
    cond = np.linalg.cond(den)
    if np.any(~np.isfinite(cond)) or np.any(cond > 1e12):
        raise SingularDenominator("denominator of the transformation rule is singular")
    # A' = num den^-1  <=>  den^T A'^T = num^T
    return np.swapaxes(np.linalg.solve(np.swapaxes(den, -1, -2), np.swapaxes(num, -1, -2)), -1, -2)


def pushforward(chart, tf: ChartTransformation, radius=None, name=None):
    """Complex matrix of tf_*(J) in the coordinates z' = tf(z)."""
    if tf.n != chart.n:
        raise ValueError("dimension mismatch")

    def A_new(w):
        w = np.asarray(w, dtype=complex)
        z = tf.inverse(w)
        return pushforward_matrix(chart.A(z), tf.jac_z(z), tf.jac_zbar(z))

    if radius is None:
        sphere = ball_samples(chart.n, chart.radius, 64, seed=1, include_boundary=True)[:32]
        center = tf(np.zeros(chart.n, complex))
        radius = 0.9 * float(np.min(np.linalg.norm(tf(sphere) - center, axis=-1)))
    return AlmostComplexChart(chart.n, float(radius), A_new, name=name or f"{tf.name}_*({chart.name})")
