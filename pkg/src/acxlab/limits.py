"""Oscillation-based limit detection over a geometric schedule of scales."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LIMIT_TOL = 5e-3
CONSECUTIVE = 3
NO_LIMIT_OSC = 0.1


def diameter(values):
    """max |v_i - v_j| over a set of complex numbers (or vectors)."""
    v = np.asarray(values, dtype=complex)
    if v.ndim == 1:
        return float(np.abs(v[:, None] - v[None, :]).max()) if len(v) > 1 else 0.0
    v = v.reshape(v.shape[0], -1) if v.ndim > 1 else v[:, None]
    if len(v) < 2:
        return 0.0
    best = 0.0
    for s in range(0, len(v), 512):
        d = np.linalg.norm(v[s:s + 512, None, :] - v[None, :, :], axis=-1)
        best = max(best, float(d.max()))
    return best


def _tail_diameters(samples):
    """diameter(concat(samples[i:])) for every i, from one distance matrix."""
    flat = np.concatenate([s.reshape(len(s), -1) for s in samples])
    start = np.cumsum([0] + [len(s) for s in samples])
    if flat.shape[1] == 1:
        D = np.abs(flat[:, 0, None] - flat[None, :, 0])
    else:
        D = np.linalg.norm(flat[:, None, :] - flat[None, :, :], axis=-1)
    tail = [0.0] * len(samples)
    acc = 0.0
    for i in range(len(samples) - 1, -1, -1):
        a, b = start[i], start[i + 1]
        if b > a:
            acc = max(acc, float(D[a:b, a:].max()))
        tail[i] = acc
    return tail


@dataclass
class LimitVerdict:
    status: str  # "limit" | "no-limit" | "inconclusive"
    value: complex | None
    table: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    tol: float = LIMIT_TOL

    @property
    def tail_oscillation(self):
        return self.table[-1]["tail_osc"] if self.table else float("nan")

    @property
    def final_oscillation(self):
        return self.table[-1]["osc"] if self.table else float("nan")

    def to_dict(self):
        v = None if self.value is None else [float(np.real(self.value)), float(np.imag(self.value))]
        return {"status": self.status, "value": v, "tol": self.tol, "table": self.table}


def judge(scales, samples, tol=LIMIT_TOL, consecutive=CONSECUTIVE, no_limit_osc=NO_LIMIT_OSC,
          witnesses=None):
    """Classify values sampled at decreasing scales.

    ``samples[i]`` holds the values seen at ``scales[i]`` (scales decrease).
    The tail oscillation at index i is the diameter of all samples from i on.

    - "limit" when the tail oscillation stays below ``tol`` on the last
      ``consecutive`` scales;
    - "no-limit" when the oscillation at the finest scale exceeds
      ``no_limit_osc`` and has not dropped below half its value on the
      preceding ``consecutive`` scales;
    - "inconclusive" otherwise.
    """
    samples = [np.asarray(s, dtype=complex) for s in samples]
    n = len(samples)
    if n == 0:
        raise ValueError("empty schedule")
    osc = [diameter(s) for s in samples]
    tail = _tail_diameters(samples)
    table = [{"scale": float(scales[i]), "count": int(len(samples[i])), "osc": osc[i],
              "tail_osc": tail[i], "mean_re": float(np.mean(samples[i]).real),
              "mean_im": float(np.mean(samples[i]).imag)} for i in range(n)]
    value = complex(np.mean(samples[-1]))
    if n >= consecutive and all(t < tol for t in tail[n - consecutive:]):
        return LimitVerdict("limit", value, table, witnesses or [], tol)
    recent = osc[max(0, n - 1 - consecutive):n - 1]
    if osc[-1] > no_limit_osc and (not recent or osc[-1] >= 0.5 * max(recent)):
        return LimitVerdict("no-limit", None, table, witnesses or [], tol)
    return LimitVerdict("inconclusive", None, table, witnesses or [], tol)
