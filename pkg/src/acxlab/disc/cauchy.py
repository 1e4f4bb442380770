"""Cauchy-Green transform T and boundary Cauchy transform K on the unit disc.

T f(zeta) = -(1/pi) * area integral of f(w) / (w - zeta) over the disc.

Writing f = sum_k f_k(r) e^{ik theta}, the transform splits per mode into
radial integrals,

    c_k(r) = -2 int_r^1 (r/s)^(k-1) f_k(s) ds      (k >= 1)
    c_k(r) =  2 int_0^r (s/r)^(1-k) f_k(s) ds      (k <= 0)

and T f = sum_k c_k(r) e^{i(k-1) theta}.  The radial profiles come from the
parity-extended spline of ``RadialSpectral`` and each radial panel is
integrated with Gauss-Legendre nodes.  Running sums are propagated from panel
to panel with ratios <= 1 so no power ever overflows.
"""
from __future__ import annotations

import numpy as np

from ..errors import EvaluationTooCloseToBoundary
from .grid import BoundaryTrace, DiscGrid, RadialSpectral, radii

GAUSS_POINTS = 8
# sign of the area kernel, pinned by the f = 1 probe (T1 = conj(zeta) inside)
KERNEL_SIGN = -1.0


class CauchyGreen:
    """Evaluator of T f for grid data f, on the grid and anywhere in the plane."""

    def __init__(self, f: DiscGrid, q=GAUSS_POINTS):
        self.grid = f
        self.interp = RadialSpectral(f)
        self.k = self.interp.k
        self.out_idx = np.nonzero(self.k <= 0)[0]
        self.in_idx = np.nonzero(self.k >= 1)[0]
        self.p_out = (1 - self.k[self.out_idx]).astype(float)
        self.p_in = (self.k[self.in_idx] - 1).astype(float)
        self.gx, self.gw = np.polynomial.legendre.leggauss(q)
        self.r = radii(f.n_r)
        self.edges = np.concatenate([[0.0], self.r, [1.0]])
        self._accumulate()

    # quadrature over [a, b] for batched endpoints -----------------------------
    def _nodes(self, a, b):
        a = np.asarray(a, float)[:, None]
        b = np.asarray(b, float)[:, None]
        s = 0.5 * (a + b) + 0.5 * (b - a) * self.gx[None, :]
        w = 0.5 * (b - a) * self.gw[None, :]
        return s, w

    def _segment(self, a, b, r, inner):
        """int_a^b ratio^p f_k ds for each mode of one family; shape (P, modes, C)."""
        s, w = self._nodes(a, b)
        S = self.interp.modes_at(s.ravel()).reshape(s.shape + self.interp.coef.shape[1:])
        r = np.asarray(r, float)[:, None]
        if inner:
            idx, pw = self.in_idx, self.p_in
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(s > 0, r / np.where(s > 0, s, 1.0), 0.0)
        else:
            idx, pw = self.out_idx, self.p_out
            ratio = np.where(r > 0, s / np.where(r > 0, r, 1.0), 0.0)
        ratio = np.clip(ratio, 0.0, 1.0)
        fac = ratio[:, :, None] ** pw[None, None, :]  # (P, q, modes)
        return np.einsum("pq,pqm,pqmc->pmc", w, fac, S[:, :, idx, :])

    def _accumulate(self):
        n = self.grid.n_r
        r, e = self.r, self.edges
        # outer sums O[j] = int_0^{r_j}, inner sums I[j] = int_{r_j}^1
        seg_out = self._segment(e[:-2], e[1:-1], r, inner=False)  # panels 0..n-1
        seg_in = self._segment(e[1:-1], e[2:], r, inner=True)     # panels 1..n
        O = np.empty_like(seg_out)
        I = np.empty_like(seg_in)
        acc = np.zeros(seg_out.shape[1:], complex)
        for j in range(n):
            if j:
                acc = acc * ((r[j - 1] / r[j]) ** self.p_out)[:, None]
            acc = acc + seg_out[j]
            O[j] = acc
        acc = np.zeros(seg_in.shape[1:], complex)
        for j in range(n - 1, -1, -1):
            if j < n - 1:
                acc = acc * ((r[j] / r[j + 1]) ** self.p_in)[:, None]
            acc = acc + seg_in[j]
            I[j] = acc
        last = self._segment([r[-1]], [1.0], [1.0], inner=False)[0]
        self.O, self.I = O, I
        self.O_total = O[-1] * (r[-1] ** self.p_out)[:, None] + last

    # outputs ----------------------------------------------------------------
    def _combine(self, c_out, c_in, theta):
        """sum_k c_k e^{i(k-1) theta}; c_* have shape (P, modes, C)."""
        ph_out = np.exp(1j * theta[:, None] * (self.k[self.out_idx] - 1)[None, :])
        ph_in = np.exp(1j * theta[:, None] * (self.k[self.in_idx] - 1)[None, :])
        return (np.einsum("pmc,pm->pc", c_out, ph_out)
                + np.einsum("pmc,pm->pc", c_in, ph_in))

    def on_grid(self) -> DiscGrid:
        n_r, n_t = self.grid.n_r, self.grid.n_theta
        C = self.interp.coef.shape[2]
        c = np.zeros((n_r, n_t, C), complex)
        c[:, self.out_idx] = -2 * KERNEL_SIGN * self.O
        c[:, self.in_idx] = 2 * KERNEL_SIGN * self.I
        th = self.grid.thetas
        vals = np.exp(-1j * th)[None, :, None] * n_t * np.fft.ifft(c, axis=1)
        return DiscGrid(vals.reshape((n_r, n_t) + self.grid.comp_shape))

    def __call__(self, zeta, chunk=256):
        zeta = np.asarray(zeta, dtype=complex)
        flat = zeta.ravel()
        C = self.interp.coef.shape[2]
        out = np.empty((flat.size, C), complex)
        for s in range(0, flat.size, chunk):
            out[s:s + chunk] = self._eval(flat[s:s + chunk])
        return out.reshape(zeta.shape + self.grid.comp_shape)

    def _eval(self, z):
        P = z.size
        rr = np.abs(z)
        th = np.angle(z)
        C = self.interp.coef.shape[2]
        c_out = np.zeros((P, self.out_idx.size, C), complex)
        c_in = np.zeros((P, self.in_idx.size, C), complex)
        ext = rr >= 1.0
        if np.any(ext):
            re = rr[ext]
            c_out[ext] = self.O_total[None] * ((1.0 / re)[:, None] ** self.p_out[None, :])[:, :, None]
        ins = ~ext
        if np.any(ins):
            ri = rr[ins]
            n = self.grid.n_r
            # panel p covers [edges[p], edges[p+1]]
            p = np.clip(np.searchsorted(self.edges, ri, side="right") - 1, 0, n)
            lo = self.edges[p]
            hi = self.edges[p + 1]
            o = self._segment(lo, ri, ri, inner=False)
            has_prev = p >= 1
            if np.any(has_prev):
                pp = p[has_prev] - 1
                fac = (lo[has_prev] / ri[has_prev])[:, None] ** self.p_out[None, :]
                o[has_prev] += self.O[pp] * fac[:, :, None]
            i = self._segment(ri, hi, ri, inner=True)
            has_next = p <= n - 1
            if np.any(has_next):
                pn = p[has_next]
                fac = (ri[has_next] / hi[has_next])[:, None] ** self.p_in[None, :]
                i[has_next] += self.I[pn] * fac[:, :, None]
            c_out[ins] = o
            c_in[ins] = i
        c_out *= -2 * KERNEL_SIGN
        c_in *= 2 * KERNEL_SIGN
        return self._combine(c_out, c_in, th)

    def boundary_trace(self, m) -> BoundaryTrace:
        return BoundaryTrace(self(np.exp(2j * np.pi * np.arange(m) / m)))


def cauchy_green(f: DiscGrid) -> CauchyGreen:
    return CauchyGreen(f)


class CauchyIntegral:
    """K f*(zeta) = (1/2 pi i) closed integral of f*(w) dw / (w - zeta), trapezoid rule."""

    def __init__(self, trace: BoundaryTrace):
        self.trace = trace
        self.guard = 1.0 - 2 * np.pi / trace.m

    def __call__(self, zeta, chunk=1024):
        zeta = np.asarray(zeta, dtype=complex)
        flat = zeta.ravel()
        if flat.size and np.max(np.abs(flat)) > self.guard + 1e-12:
            bad = flat[np.argmax(np.abs(flat))]
            raise EvaluationTooCloseToBoundary(
                f"|zeta| = {abs(bad):.6g} exceeds 1 - 2pi/M = {self.guard:.6g}")
        w = self.trace.points
        vals = self.trace.values.reshape(self.trace.m, -1)
        out = np.empty((flat.size, vals.shape[1]), complex)
        for s in range(0, flat.size, chunk):
            z = flat[s:s + chunk]
            kern = w[None, :] / (w[None, :] - z[:, None]) / self.trace.m
            out[s:s + chunk] = kern @ vals
        return out.reshape(zeta.shape + self.trace.values.shape[1:])

    def on_grid(self, n_r, n_theta, r_max=None):
        """Node values for nodes with |zeta| <= r_max (others are nan)."""
        from .grid import nodes
        Z = nodes(n_r, n_theta)
        r_max = self.guard if r_max is None else r_max
        mask = np.abs(Z) <= r_max
        out = np.full(Z.shape + self.trace.values.shape[1:], np.nan + 0j)
        out[mask] = self(Z[mask])
        return out, mask


def cauchy_integral(trace: BoundaryTrace) -> CauchyIntegral:
    return CauchyIntegral(trace)
