"""Polynomials in z and conj(z), and polynomial self-maps of C^n.

A monomial is keyed by a single exponent tuple of length 2n: the first n
entries are powers of z_1..z_n, the last n are powers of conj(z)_1..conj(z)_n.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import InverseFailure


def _clean(terms, tol=0.0):
    return {k: complex(v) for k, v in terms.items() if abs(v) > tol}


class Poly:
    """Complex polynomial p(z, conj z) on C^n, evaluated on arrays of shape (..., n)."""

    def __init__(self, n: int, terms=None):
        self.n = int(n)
        self.terms = _clean(dict(terms or {}))
        for key in self.terms:
            if len(key) != 2 * self.n:
                raise ValueError(f"exponent {key} has wrong length for n={n}")

    # constructors -----------------------------------------------------------
    @classmethod
    def const(cls, n, c):
        return cls(n, {(0,) * (2 * n): c})

    @classmethod
    def var(cls, n, j, conj=False):
        e = [0] * (2 * n)
        e[j + n if conj else j] = 1
        return cls(n, {tuple(e): 1.0})

    @classmethod
    def monomial(cls, n, alpha, beta, c=1.0):
        return cls(n, {tuple(alpha) + tuple(beta): c})

    # algebra ----------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(self.n, other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) + v
        return Poly(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.n, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly(self.n, {k: v * other for k, v in self.terms.items()})
        out = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, 0.0) + v1 * v2
        return Poly(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, p: int):
        out = Poly.const(self.n, 1.0)
        for _ in range(p):
            out = out * self
        return out

    def conj(self):
        n = self.n
        return Poly(n, {k[n:] + k[:n]: np.conj(v) for k, v in self.terms.items()})

    def d_z(self, m):
        out = {}
        for k, v in self.terms.items():
            if k[m]:
                kk = list(k)
                kk[m] -= 1
                out[tuple(kk)] = out.get(tuple(kk), 0.0) + v * k[m]
        return Poly(self.n, out)

    def d_zbar(self, m):
        out = {}
        i = m + self.n
        for k, v in self.terms.items():
            if k[i]:
                kk = list(k)
                kk[i] -= 1
                out[tuple(kk)] = out.get(tuple(kk), 0.0) + v * k[i]
        return Poly(self.n, out)

    @property
    def degree(self):
        return max((sum(k) for k in self.terms), default=0)

    def homogeneous_part(self, d):
        return Poly(self.n, {k: v for k, v in self.terms.items() if sum(k) == d})

    def compose(self, maps):
        """Substitute z_j -> maps[j] (and conj z_j -> conj(maps[j]))."""
        if not maps:
            raise ValueError("empty substitution")
        n_new = maps[0].n
        conj_maps = [m.conj() for m in maps]
        out = Poly(n_new)
        for k, v in self.terms.items():
            term = Poly.const(n_new, v)
            for j in range(self.n):
                if k[j]:
                    term = term * maps[j] ** k[j]
                if k[j + self.n]:
                    term = term * conj_maps[j] ** k[j + self.n]
            out = out + term
        return out

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape[:-1], dtype=complex)
        zb = z.conj()
        for k, v in self.terms.items():
            t = np.full(z.shape[:-1], v, dtype=complex)
            for j in range(self.n):
                if k[j]:
                    t = t * z[..., j] ** k[j]
                if k[j + self.n]:
                    t = t * zb[..., j] ** k[j + self.n]
            out = out + t
        return out

    def is_zero(self):
        return not self.terms

    def __repr__(self):
        return f"Poly(n={self.n}, terms={self.terms})"


def eval_matrix(polys, z):
    """Evaluate a nested list of Poly (rows x cols) into an array (..., rows, cols)."""
    z = np.asarray(z, dtype=complex)
    rows = [np.stack([p(z) for p in row], axis=-1) for row in polys]
    return np.stack(rows, axis=-2)


def _real_matrix(P, Q):
    """Real 2n x 2n matrix of v -> P v + Q conj(v) in coordinates (x1, y1, x2, y2, ...)."""
    n = P.shape[0]
    M = np.zeros((2 * n, 2 * n))
    M[0::2, 0::2] = P.real + Q.real
    M[0::2, 1::2] = -P.imag + Q.imag
    M[1::2, 0::2] = P.imag + Q.imag
    M[1::2, 1::2] = P.real - Q.real
    return M


def c2r(z):
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def r2c(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


@dataclass(frozen=True)
class ChartTransformation:
    """Polynomial change of coordinates z -> z' with an inverse.

    ``inverse_fn`` is used when supplied (linear maps, shears, compositions of
    maps with known inverses); otherwise the inverse is found by damped
    fixed-point iteration seeded at the inverse of the linear part.
    """

    components: tuple
    inverse_fn: Callable | None = None
    name: str = ""
    _jz: tuple = field(init=False, repr=False, compare=False)
    _jzb: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        n = len(comps)
        object.__setattr__(self, "_jz", tuple(tuple(c.d_z(m) for m in range(n)) for c in comps))
        object.__setattr__(self, "_jzb", tuple(tuple(c.d_zbar(m) for m in range(n)) for c in comps))

    @property
    def n(self):
        return len(self.components)

    @property
    def degree(self):
        return max(c.degree for c in self.components)

    @classmethod
    def identity(cls, n):
        return cls.linear(np.eye(n), np.zeros((n, n)), name="identity")

    @classmethod
    def linear(cls, P, Q=None, name="linear"):
        """The R-linear map z -> P z + Q conj(z)."""
        P = np.asarray(P, dtype=complex)
        n = P.shape[0]
        Q = np.zeros((n, n), complex) if Q is None else np.asarray(Q, dtype=complex)
        comps = []
        for j in range(n):
            p = Poly(n)
            for m in range(n):
                p = p + Poly.var(n, m) * P[j, m] + Poly.var(n, m, conj=True) * Q[j, m]
            comps.append(p)
        Minv = np.linalg.inv(_real_matrix(P, Q))
        return cls(tuple(comps), inverse_fn=lambda w: r2c(c2r(w) @ Minv.T), name=name)

    @classmethod
    def diagonal(cls, scales, name="diagonal"):
        return cls.linear(np.diag(np.asarray(scales, dtype=complex)), name=name)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.stack([c(z) for c in self.components], axis=-1)

    forward = __call__

    def jac_z(self, z):
        return eval_matrix(self._jz, z)

    def jac_zbar(self, z):
        return eval_matrix(self._jzb, z)

    def linear_part(self):
        """(P, Q) with the degree-one part equal to P z + Q conj(z); requires a fixed origin."""
        zero = np.zeros(self.n, complex)
        return self.jac_z(zero), self.jac_zbar(zero)

    def real_jacobian(self, z):
        return _real_matrix(self.jac_z(z), self.jac_zbar(z))

    def inverse(self, w, tol=1e-15, max_iter=50):
        w = np.asarray(w, dtype=complex)
        if self.inverse_fn is not None:
            return self.inverse_fn(w)
        zero = np.zeros(self.n, complex)
        c0 = self(zero)
        M = _real_matrix(*self.linear_part())
        Minv = np.linalg.inv(M)
        z = r2c((c2r(w) - c2r(c0)) @ Minv.T)
        scale = 1.0 + np.max(np.abs(w))
        damping = 1.0
        prev = np.inf
        for _ in range(max_iter):
            resid = self(z) - w
            err = np.max(np.abs(resid)) if resid.size else 0.0
            if err <= tol * scale:
                return z
            if err > prev:
                damping *= 0.5
            prev = err
            z = z - damping * r2c(c2r(resid) @ Minv.T)
        resid = np.max(np.abs(self(z) - w))
        if resid > 1e-12 * scale:
            raise InverseFailure(f"inverse iteration did not converge (residual {resid:.3e})")
        return z

    def compose(self, inner: "ChartTransformation") -> "ChartTransformation":
        """Return self o inner."""
        comps = tuple(c.compose(list(inner.components)) for c in self.components)
        outer = self

        def inv(w):
            return inner.inverse(outer.inverse(w))

        return ChartTransformation(comps, inverse_fn=inv, name=f"({self.name})o({inner.name})")
