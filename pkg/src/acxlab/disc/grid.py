"""Polar grids on the unit disc, boundary traces and polar differentiation.

Nodes are zeta_jk = r_j exp(i theta_k) with r_j = (j + 1/2)/N_r and
theta_k = 2 pi k / N_theta.  Values may carry trailing component axes.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import make_interp_spline

RADIAL_ORDER = 6
SPLINE_DEGREE = 5


@dataclass(frozen=True)
class DiscGrid:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.ndim < 2:
            raise ValueError("grid values need shape (n_r, n_theta, ...)")
        if v.shape[1] % 2:
            raise ValueError("n_theta must be even")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_r(self):
        return self.values.shape[0]

    @property
    def n_theta(self):
        return self.values.shape[1]

    @property
    def comp_shape(self):
        return self.values.shape[2:]

    @property
    def radii(self):
        return radii(self.n_r)

    @property
    def thetas(self):
        return thetas(self.n_theta)

    @property
    def nodes(self):
        return nodes(self.n_r, self.n_theta)

    @property
    def cell_areas(self):
        return cell_areas(self.n_r, self.n_theta)

    @classmethod
    def from_function(cls, f, n_r, n_theta):
        return cls(np.asarray(f(nodes(n_r, n_theta)), dtype=complex))

    def like(self, values):
        return DiscGrid(values)

    def __add__(self, other):
        return DiscGrid(self.values + _vals(other))

    def __sub__(self, other):
        return DiscGrid(self.values - _vals(other))

    def sup(self, interior_only=False):
        v = self.values[:-1] if interior_only else self.values
        a = np.abs(v)
        if v.ndim > 2:
            a = np.sqrt(np.sum(a.reshape(a.shape[:2] + (-1,)) ** 2, axis=-1))
        return float(np.max(a))

    def lp_norm(self, p=4.0):
        a = np.abs(self.values)
        if a.ndim > 2:
            a = np.sqrt(np.sum(a.reshape(a.shape[:2] + (-1,)) ** 2, axis=-1))
        return float(np.sum(self.cell_areas * a ** p) ** (1.0 / p))

    def l2_norm(self):
        return self.lp_norm(2.0)


def _vals(x):
    return x.values if isinstance(x, DiscGrid) else x


@lru_cache(maxsize=None)
def _radii(n_r):
    r = (np.arange(n_r) + 0.5) / n_r
    r.setflags(write=False)
    return r


def radii(n_r):
    return _radii(int(n_r))


def thetas(n_theta):
    return 2 * np.pi * np.arange(n_theta) / n_theta


def nodes(n_r, n_theta):
    return radii(n_r)[:, None] * np.exp(1j * thetas(n_theta))[None, :]


def cell_areas(n_r, n_theta):
    j = np.arange(n_r)
    ring = np.pi * ((j + 1.0) ** 2 - j ** 2) / n_r ** 2
    return np.repeat((ring / n_theta)[:, None], n_theta, axis=1)


@dataclass(frozen=True)
class BoundaryTrace:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape[0] % 2:
            raise ValueError("trace sample count must be even")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def m(self):
        return self.values.shape[0]

    @property
    def thetas(self):
        return thetas(self.m)

    @property
    def weights(self):
        return np.full(self.m, 2 * np.pi / self.m)

    @property
    def points(self):
        return np.exp(1j * self.thetas)

    @classmethod
    def from_function(cls, f, m):
        return cls(np.asarray(f(np.exp(1j * thetas(m))), dtype=complex))

    def sup(self):
        return float(np.max(np.abs(self.values)))


# -- differentiation ----------------------------------------------------------

@lru_cache(maxsize=None)
def fd_weights(offsets, deriv=1):
    """Finite-difference weights at 0 for unit-spaced ``offsets``."""
    x = np.asarray(offsets, dtype=float)
    m = len(x)
    V = np.vander(x, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[deriv] = float(np.prod(np.arange(1, deriv + 1)))
    w = np.linalg.solve(V, rhs)
    w.setflags(write=False)
    return w


def _radial_extension(v, pad):
    """Prepend ``pad`` ghost rows f(-r_j, theta) = f(r_j, theta + pi)."""
    half = v.shape[1] // 2
    ghosts = np.roll(v[:pad][::-1], -half, axis=1)
    return np.concatenate([ghosts, v], axis=0)


def radial_derivative(v):
    """d/dr along axis 0: centered stencil of order 6, one-sided near r = 1."""
    n_r = v.shape[0]
    h = 1.0 / n_r
    half = RADIAL_ORDER // 2
    width = RADIAL_ORDER + 1
    if n_r < width:
        raise ValueError(f"need at least {width} radial nodes")
    ext = _radial_extension(v, half)
    out = np.empty_like(v)
    wc = fd_weights(tuple(range(-half, half + 1)))
    n_center = n_r - half
    acc = np.zeros_like(v[:n_center])
    for i, w in enumerate(wc):
        acc = acc + w * ext[i:i + n_center]
    out[:n_center] = acc
    for j in range(n_center, n_r):
        start = n_r - width
        offs = tuple(range(start - j, n_r - j))
        w = fd_weights(offs)
        out[j] = np.tensordot(w, v[start:n_r], axes=(0, 0))
    return out / h


def angular_derivative(v):
    n_t = v.shape[1]
    k = np.fft.fftfreq(n_t, 1.0 / n_t)
    k[n_t // 2] = 0.0  # Nyquist mode has no well-defined derivative
    shape = [1, n_t] + [1] * (v.ndim - 2)
    return np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(v, axis=1), axis=1)


def _polar_parts(f):
    v = f.values
    r = f.radii.reshape((-1, 1) + (1,) * (v.ndim - 2))
    e = np.exp(1j * f.thetas).reshape((1, -1) + (1,) * (v.ndim - 2))
    return radial_derivative(v), angular_derivative(v) / r, e


def dbar_grid(f: DiscGrid) -> DiscGrid:
    """d/dzeta-bar = (e^{i theta}/2)(d_r + (i/r) d_theta)."""
    fr, ft, e = _polar_parts(f)
    return DiscGrid(0.5 * e * (fr + 1j * ft))


def dz_grid(f: DiscGrid) -> DiscGrid:
    """d/dzeta = (e^{-i theta}/2)(d_r - (i/r) d_theta)."""
    fr, ft, e = _polar_parts(f)
    return DiscGrid(0.5 * e.conj() * (fr - 1j * ft))


# -- interpolation ------------------------------------------------------------

class RadialSpectral:
    """Fourier modes in theta with a parity-extended quintic spline in r.

    Mode k of a smooth function behaves like r^|k| times a function of r^2, so
    the radial profile is extended to negative r with the sign (-1)^k; the
    spline then passes smoothly through the origin.
    """

    def __init__(self, grid: DiscGrid):
        v = grid.values
        self.n_r, self.n_theta = v.shape[:2]
        self.comp_shape = v.shape[2:]
        flat = v.reshape(self.n_r, self.n_theta, -1)
        self.k = np.fft.fftfreq(self.n_theta, 1.0 / self.n_theta).astype(int)
        self.coef = np.fft.fft(flat, axis=1) / self.n_theta
        sign = np.where(self.k % 2 == 0, 1.0, -1.0)[None, :, None]
        r = radii(self.n_r)
        x = np.concatenate([-r[::-1], r])
        y = np.concatenate([(self.coef * sign)[::-1], self.coef], axis=0)
        self.spline = make_interp_spline(x, y, k=SPLINE_DEGREE)

    def modes_at(self, r):
        return self.spline(np.asarray(r, dtype=float))

    def __call__(self, zeta, chunk=512):
        zeta = np.asarray(zeta, dtype=complex)
        flat = zeta.ravel()
        out = np.empty((flat.size, self.coef.shape[2]), complex)
        kk = self.k.astype(float)
        nyq = self.n_theta // 2
        for s in range(0, flat.size, chunk):
            z = flat[s:s + chunk]
            m = self.modes_at(np.abs(z))
            ph = np.exp(1j * np.angle(z)[:, None] * kk[None, :])
            # split the Nyquist mode evenly between +-N/2
            ph[:, nyq] = np.cos(nyq * np.angle(z))
            out[s:s + chunk] = np.einsum("pkc,pk->pc", m, ph)
        return out.reshape(zeta.shape + self.comp_shape)


def interpolant(grid: DiscGrid):
    return RadialSpectral(grid)


# -- serialization ------------------------------------------------------------

def _fmt(x):
    return repr(float(x))


def grid_to_csv(grid: DiscGrid, meta=None) -> str:
    """CSV text with a leading '# {json}' metadata line."""
    v = grid.values.reshape(grid.n_r, grid.n_theta, -1)
    ncomp = v.shape[2]
    header = {"n_r": grid.n_r, "n_theta": grid.n_theta, "components": list(grid.comp_shape)}
    header.update(meta or {})
    buf = io.StringIO()
    buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
    cols = ["j", "k"] + [f"{p}_{c}" for c in range(ncomp) for p in ("re", "im")]
    buf.write(",".join(cols) + "\n")
    for j in range(grid.n_r):
        for k in range(grid.n_theta):
            row = [str(j), str(k)]
            for c in range(ncomp):
                row += [_fmt(v[j, k, c].real), _fmt(v[j, k, c].imag)]
            buf.write(",".join(row) + "\n")
    return buf.getvalue()


def grid_from_csv(text: str):
    lines = text.splitlines()
    meta = json.loads(lines[0][2:])
    n_r, n_t = meta["n_r"], meta["n_theta"]
    comps = tuple(meta.get("components", []))
    data = np.loadtxt(lines[2:], delimiter=",", ndmin=2)
    vals = data[:, 2::2] + 1j * data[:, 3::2]
    return DiscGrid(vals.reshape((n_r, n_t) + comps)), meta


def trace_to_csv(trace: BoundaryTrace, meta=None) -> str:
    v = trace.values.reshape(trace.m, -1)
    header = {"m": trace.m, "components": list(trace.values.shape[1:])}
    header.update(meta or {})
    buf = io.StringIO()
    buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
    buf.write(",".join(["k"] + [f"{p}_{c}" for c in range(v.shape[1]) for p in ("re", "im")]) + "\n")
    for k in range(trace.m):
        row = [str(k)]
        for c in range(v.shape[1]):
            row += [_fmt(v[k, c].real), _fmt(v[k, c].imag)]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def trace_from_csv(text: str):
    lines = text.splitlines()
    meta = json.loads(lines[0][2:])
    data = np.loadtxt(lines[2:], delimiter=",", ndmin=2)
    vals = data[:, 1::2] + 1j * data[:, 2::2]
    return BoundaryTrace(vals.reshape((meta["m"],) + tuple(meta.get("components", [])))), meta
