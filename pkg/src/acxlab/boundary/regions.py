"""Approach regions at boundary points of {rho < 0} and their samplers.

cone:        dist(p, q) < alpha * delta_p(q)
admissible:  d_p(q) < (1 + alpha) delta_p(q)  and  dist(p, q)^2 < alpha * delta_p(q)

delta_p is the smaller of the distances to the tangent plane T_p and to the
boundary; d_p is the distance to the affine complex tangent space p + H_p.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ..core.chart import AlmostComplexChart, j_matrix, jst_matrix
from ..core.levi import DefiningFunction
from ..core.poly import c2r, r2c
from ..errors import EmptyShell, OutsideDomain

KINDS = ("cone", "admissible")
DELTA_MODES = ("proxy", "tangent", "geometric")


@dataclass(frozen=True)
class ApproachRegion:
    """Approach region at p.

    ``delta_mode`` selects delta_p: "proxy" uses |rho(q)| (model domains),
    "tangent" uses min(dist to T_p, |rho(q)| / |grad rho(p)|) and "geometric"
    uses min(dist to T_p, distance to the boundary found by constrained
    projection).
    """

    p: np.ndarray
    alpha: float
    rho: DefiningFunction
    kind: str = "admissible"
    chart: AlmostComplexChart | None = None
    delta_mode: str = "proxy"
    _frame: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.delta_mode not in DELTA_MODES:
            raise ValueError(f"unknown delta mode {self.delta_mode!r}")
        if not self.alpha > 0:
            raise ValueError("aperture must be positive")
        p = np.asarray(self.p, dtype=complex)
        object.__setattr__(self, "p", p)
        n = p.size
        g = self.rho.gradient(p)
        gn = float(np.linalg.norm(g))
        if gn == 0:
            raise ValueError("defining function has a critical point at p")
        J = jst_matrix(n) if self.chart is None else j_matrix(self.chart, p)
        # H_p^perp = span{grad rho, J^T grad rho}
        Q, _ = np.linalg.qr(np.stack([g, J.T @ g], axis=1))
        N = g / gn
        m = Q[:, 1] - (Q[:, 1] @ N) * N
        m /= np.linalg.norm(m)
        # orthonormal basis of H_p: complement of Q
        full = np.linalg.svd(Q, full_matrices=True)[0]
        H = full[:, 2:]
        object.__setattr__(self, "_frame", {"g": g, "gnorm": gn, "N": N, "nu": -N, "m": m,
                                            "Q": Q, "H": H, "J": J})

    @property
    def n(self):
        return self.p.size

    @property
    def inward_normal(self):
        return self._frame["nu"]

    def with_alpha(self, alpha):
        return ApproachRegion(self.p, alpha, self.rho, self.kind, self.chart, self.delta_mode)


def _boundary_distance(region, x):
    rho = lambda y: float(region.rho(r2c(y)))
    res = minimize(lambda y: float(np.sum((y - x) ** 2)), x, jac=lambda y: 2 * (y - x),
                   constraints=[{"type": "eq", "fun": rho}], method="SLSQP",
                   options={"ftol": 1e-16, "maxiter": 200})
    return float(np.linalg.norm(res.x - x))


def delta_dist(region: ApproachRegion, q, check=True):
    """(delta_p(q), d_p(q), dist(p, q)); q of shape (n,) or (..., n)."""
    q = np.asarray(q, dtype=complex)
    rq = region.rho(q)
    if check and np.any(rq >= 0):
        raise OutsideDomain(f"rho(q) = {np.max(rq):.3e} >= 0: point not in the domain")
    fr = region._frame
    x = c2r(q) - c2r(region.p)
    dist = np.linalg.norm(x, axis=-1)
    d = np.linalg.norm(x @ fr["Q"], axis=-1)
    if region.delta_mode == "proxy":
        delta = np.abs(rq)
    else:
        to_plane = np.abs(x @ fr["N"])
        if region.delta_mode == "tangent":
            delta = np.minimum(to_plane, np.abs(rq) / fr["gnorm"])
        else:
            xs = c2r(q).reshape(-1, 2 * region.n)
            bd = np.array([_boundary_distance(region, xi) for xi in xs]).reshape(np.shape(rq))
            delta = np.minimum(to_plane, bd)
    return delta, d, dist


@dataclass
class Membership:
    inside: np.ndarray
    slack: dict


def in_region(region: ApproachRegion, q, check=True) -> Membership:
    """Evaluate the region inequalities; slack > 0 means the inequality holds."""
    delta, d, dist = delta_dist(region, q, check=check)
    a = region.alpha
    if region.kind == "cone":
        slack = {"cone": a * delta - dist}
    else:
        slack = {"normal": (1 + a) * delta - d, "tangential": a * delta - dist ** 2}
    inside = np.logical_and.reduce([s > 0 for s in slack.values()])
    return Membership(np.asarray(inside), slack)


@dataclass
class ApproachSamples:
    scales: np.ndarray
    points: list  # per scale, (m_k, n)
    deltas: list

    def flat(self):
        return np.concatenate(self.points, axis=0)


def _solve_depth(region, base, target, iters=40):
    """Move each base point along the inward normal until rho = -target."""
    fr = region._frame
    nu = fr["nu"]
    s = target / fr["gnorm"]
    for _ in range(iters):
        x = base + s[:, None] * nu
        z = r2c(x)
        f = region.rho(z) + target
        df = region.rho.gradient(z) @ nu
        step = f / np.where(np.abs(df) > 1e-300, df, np.nan)
        s = s - step
        if np.all(np.abs(f) <= 1e-14 * np.maximum(target, 1e-300) + 1e-300):
            break
    x = base + s[:, None] * nu
    ok = np.isfinite(s) & (np.abs(region.rho(r2c(x)) + target) <= 1e-9 * target)
    return x, ok


def _candidates(region, delta, m, rng):
    fr = region._frame
    a = region.alpha
    dimH = fr["H"].shape[1]
    if region.kind == "cone":
        rh, rb = 0.7 * a * delta, a * delta
    else:
        rh, rb = np.sqrt(a * delta), (1 + a) * delta
    u = rng.standard_normal((m, dimH))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    rad = rh * rng.random(m) ** (1.0 / dimH) if dimH else np.zeros(m)
    h = (u * rad[:, None]) @ fr["H"].T if dimH else np.zeros((m, 2 * region.n))
    b = rb * (2 * rng.random(m) - 1)
    h[0] = 0.0  # the normal ray is always tried first
    b[0] = 0.0
    return c2r(region.p)[None, :] + h + b[:, None] * fr["m"][None, :]


def sample_approach(region: ApproachRegion, count=16, seed=0, ks=range(3, 15), oversample=4,
                    max_rounds=12, rng=None) -> ApproachSamples:
    """Points of the region at depths delta = 2^-k.

    Candidates spread over the complex tangent directions and the normal
    complement, are pushed along the inward normal to the prescribed depth and
    kept when they satisfy the region inequalities.  All scales are processed
    together in each round.
    """
    rng = np.random.default_rng(seed) if rng is None else rng
    scales = np.array([2.0 ** -k for k in ks])
    # depth in rho units so that delta_p follows the schedule
    gn = 1.0 if region.delta_mode == "proxy" else region._frame["gnorm"]
    m = oversample * count
    kept = [[] for _ in scales]
    todo = list(range(len(scales)))
    for _ in range(max_rounds):
        if not todo:
            break
        base = np.concatenate([_candidates(region, scales[i], m, rng) for i in todo])
        target = np.repeat(scales[todo] * gn, m)
        x, ok = _solve_depth(region, base, target)
        z = r2c(x)
        good = np.zeros(len(z), bool)
        if np.any(ok):
            mem = in_region(region, z[ok], check=False)
            good[ok] = mem.inside & (region.rho(z[ok]) < 0)
        for j, i in enumerate(todo):
            sl = slice(j * m, (j + 1) * m)
            kept[i].extend(z[sl][good[sl]][: count - len(kept[i])])
        todo = [i for i in todo if len(kept[i]) < count]
    pts, dels = [], []
    for i, delta in enumerate(scales):
        if not kept[i]:
            raise EmptyShell(delta)
        zi = np.array(kept[i])
        pts.append(zi)
        dels.append(delta_dist(region, zi, check=False)[0])
    return ApproachSamples(scales, pts, dels)
