"""Slicing a generic submanifold into totally real pieces.

N is given by a parametrization u -> N(u) from R^(d+n) into C^n.  The slices
E_s = {u[:d] = s} are n-dimensional; a slice is totally real at a point when
its tangent space meets its J-image only at 0, i.e. the real 2n x 2n matrix
[B, J B] built from a tangent basis B has full rank.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.chart import j_matrix, jst_matrix
from ..core.poly import c2r
from ..errors import TotallyRealFailure

SIGMA_MIN = 1e-8


def numeric_jacobian(param, u, h=1e-6):
    """Real Jacobian (2n x m) of u -> c2r(param(u)) by central differences."""
    u = np.asarray(u, float)
    cols = []
    for i in range(u.size):
        e = np.zeros(u.size)
        e[i] = h
        cols.append((c2r(param(u + e)) - c2r(param(u - e))) / (2 * h))
    return np.stack(cols, axis=1)


@dataclass
class SliceCertificate:
    s: np.ndarray
    points: np.ndarray
    sigma_min: np.ndarray
    condition: np.ndarray

    @property
    def certified(self):
        return bool(np.all(self.sigma_min > SIGMA_MIN))


def totally_real_sigma(B, J):
    """Smallest singular value and condition number of [B, J B] with B orthonormalized."""
    Q, _ = np.linalg.qr(B)
    M = np.concatenate([Q, J @ Q], axis=1)
    sv = np.linalg.svd(M, compute_uv=False)
    return float(sv[-1]), float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")


def foliate_generic(param, d, slices, samples, jacobian=None, chart=None, raise_on_fail=True):
    """Certify each slice E_s at the given sample parameters.

    ``slices`` is a sequence of s in R^d and ``samples`` a sequence of
    t in R^n; the slice point is param(concat(s, t)).
    """
    out = []
    for s in slices:
        s = np.atleast_1d(np.asarray(s, float))
        if s.size != d:
            raise ValueError("slice parameter has the wrong length")
        pts, sig, cond = [], [], []
        for t in samples:
            u = np.concatenate([s, np.atleast_1d(np.asarray(t, float))])
            z = np.asarray(param(u), complex)
            Jr = jacobian(u) if jacobian is not None else numeric_jacobian(param, u)
            B = np.asarray(Jr)[:, d:]
            if B.shape[1] * 2 != B.shape[0]:
                raise ValueError("slices must have real dimension n")
            J = jst_matrix(z.size) if chart is None else j_matrix(chart, z)
            sm, cn = totally_real_sigma(B, J)
            if sm <= SIGMA_MIN and raise_on_fail:
                raise TotallyRealFailure(z, sm)
            pts.append(z)
            sig.append(sm)
            cond.append(cn)
        out.append(SliceCertificate(s, np.array(pts), np.array(sig), np.array(cond)))
    return out
