"""Property checks on structures shared by the CLI suites and the tests."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .core.chart import AlmostComplexChart, ball_samples, j_matrix, pushforward
from .core.levi import levi_form, model_defining_function
from .core.model import (ModelStructure, dilate_chart, dim2_flatten, is_normalized, model_chart,
                         model_limit, nonisotropic_dilation, normalize_chart)
from .core.poly import ChartTransformation, Poly


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool

    def as_dict(self):
        return asdict(self)


def check(name, value, threshold, below=True):
    value = float(value)
    ok = value < threshold if below else value > threshold
    return Check(name, value, float(threshold), bool(ok))


# -- random structures ----------------------------------------------------------

def _monomials(n, max_degree):
    out = []
    for deg in range(max_degree + 1):
        for a in np.ndindex(*([deg + 1] * (2 * n))):
            if sum(a) == deg:
                out.append(a)
    return out


def random_polynomial_chart(n, rng, radius=1.0, size=0.3, max_degree=2, normalized=False, name="random"):
    """Polynomial chart whose coefficient l1-norm per entry stays below size / n.

    On the ball of radius <= 1 every entry is then bounded by size / n, so the
    spectral norm of A is below ``size``.  ``normalized`` drops the constant
    terms and the monomials that are linear in z alone.
    """
    polys = [[Poly(n) for _ in range(n)] for _ in range(n)]
    mons = _monomials(n, max_degree)
    if normalized:
        mons = [m for m in mons if sum(m) >= 1 and not (sum(m) == 1 and sum(m[n:]) == 0)]
    budget = size / n / max(radius, 1.0) ** max_degree
    for i in range(n):
        for j in range(n):
            c = rng.standard_normal(len(mons)) + 1j * rng.standard_normal(len(mons))
            c *= budget / np.sum(np.abs(c))
            for m, v in zip(mons, c):
                polys[i][j] = polys[i][j] + Poly.monomial(n, m[:n], m[n:], v)
    return AlmostComplexChart.from_polys(polys, radius, name=name)


def random_transformation(n, rng, size=0.1):
    """Near-identity quadratic map z -> P z + Q conj z + small quadratic terms."""
    P = np.eye(n) + size * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    Q = size * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    lin = ChartTransformation.linear(P, Q)
    comps = []
    for j in range(n):
        c = lin.components[j]
        for _ in range(2):
            a, b = rng.integers(0, n, 2)
            coef = size * complex(rng.standard_normal(), rng.standard_normal())
            c = c + Poly.var(n, int(a)) * Poly.var(n, int(b), conj=bool(rng.integers(2))) * coef
        comps.append(c)
    return ChartTransformation(tuple(comps), name="random-quadratic")


def sample_u(n):
    """A smooth real test function: |z|^2 + Re(z_1^2 conj z_n) + 0.3 Im(z_1 z_n)."""
    def u(z):
        z = np.asarray(z, complex)
        return float(np.sum(np.abs(z) ** 2) + np.real(z[0] ** 2 * np.conj(z[-1])) + 0.3 * np.imag(z[0] * z[-1]))
    return u


# -- structure algebra ------------------------------------------------------------

def j_squared_error(chart, points):
    n = chart.n
    I = np.eye(2 * n)
    return max(float(np.max(np.abs(j_matrix(chart, p) @ j_matrix(chart, p) + I))) for p in points)


def functoriality_error(chart, tf1, tf2, points):
    """| (tf2)_*((tf1)_* A) - (tf2 o tf1)_* A | at the images of ``points``."""
    a = pushforward(pushforward(chart, tf1), tf2)
    b = pushforward(chart, tf2.compose(tf1))
    w = tf2(tf1(points))
    return float(np.max(np.abs(a.A(w) - b.A(w))))


def levi_invariance_error(chart, tf, u, p, V):
    """|H_{tf_* J}(u o tf^-1)(tf p, dtf V) - H_J(u)(p, V)| relative to max(1, |H_J|)."""
    pushed = pushforward(chart, tf)
    v_new = tf.jac_z(p) @ V + tf.jac_zbar(p) @ np.conj(V)

    def u_new(w):
        return u(tf.inverse(np.asarray(w, complex)))

    h0 = levi_form(chart, u, p, V)
    h1 = levi_form(pushed, u_new, tf(p), v_new, h=chart.h)
    return abs(h1 - h0) / max(1.0, abs(h0))


# -- normalization and models -------------------------------------------------------

def normalization_errors(chart):
    out, _ = normalize_chart(chart)
    zero = np.zeros(chart.n, complex)
    return float(np.max(np.abs(out.A(zero)))), float(np.max(np.abs(out._fd(zero, conj=False))))


def dilation_error(chart, lam, samples):
    """sup |A_lam - A_0| over ``samples`` for the nonisotropic dilation of a normalized chart."""
    model = model_limit(chart)
    m = model_chart(model, radius=1e-9 + np.max(np.linalg.norm(samples, axis=-1)), margin=-np.inf)
    d = dilate_chart(chart, lam, "nonisotropic")
    return float(np.max(np.abs(d.A(samples) - m.A(samples))))


def model_invariance_error(model, lams, samples):
    ch = model_chart(model, 1.0, margin=-np.inf)
    err = 0.0
    for lam in lams:
        d = pushforward(ch, nonisotropic_dilation(model.n, lam), radius=1.0)
        err = max(err, float(np.max(np.abs(d.A(samples) - model.A0(samples)))))
    return err


def flatten_error(model, samples):
    tf = dim2_flatten(model)
    ch = model_chart(model, 1.0, margin=-np.inf)
    pushed = pushforward(ch, tf, radius=0.5)
    return float(np.max(np.abs(pushed.A(tf(samples)))))


def model_levi_min(model, count=16, seed=0):
    """Smallest Levi form of rho_0 on H_0 at 0 over sampled unit directions."""
    n = model.n
    ch = model_chart(model, 1.0, margin=-np.inf)
    rho = model_defining_function(n)
    rng = np.random.default_rng(seed)
    vals = []
    for _ in range(count):
        v = np.zeros(n, complex)
        v[:-1] = rng.standard_normal(n - 1) + 1j * rng.standard_normal(n - 1)
        v /= np.linalg.norm(v)
        vals.append(levi_form(ch, lambda z: float(rho(z)), np.zeros(n, complex), v))
    return float(min(vals))


def random_model(n, rng, scale=0.5):
    mu = scale * (rng.standard_normal((n - 1, n - 1)) + 1j * rng.standard_normal((n - 1, n - 1)))
    return ModelStructure(n, mu)


def transform_suite(chart: AlmostComplexChart, seed=0, probes=100):
    """Structure-algebra checks on one chart; returns a list of Check."""
    rng = np.random.default_rng(seed)
    n = chart.n
    pts = ball_samples(n, 0.5 * chart.radius, probes, seed=seed, include_boundary=False)
    checks = [check("j_squared", j_squared_error(chart, pts), 1e-10)]
    tf1 = random_transformation(n, rng, 0.05)
    tf2 = random_transformation(n, rng, 0.05)
    inner = ball_samples(n, 0.2 * chart.radius, 20, seed=seed + 1, include_boundary=False)
    checks.append(check("pushforward_functoriality", functoriality_error(chart, tf1, tf2, inner), 1e-8))
    p = inner[0]
    V = inner[1] / np.linalg.norm(inner[1])
    checks.append(check("levi_invariance", levi_invariance_error(chart, tf1, sample_u(n), p, V), 1e-6))
    checks.append(check("normalized_A0", normalization_errors(chart)[0], 1e-12))
    if is_normalized(chart) and n >= 2:
        model = model_limit(chart)
        checks.append(check("model_levi_positive", model_levi_min(model), 0.0, below=False))
        if n == 2:
            flat = ball_samples(2, 0.25, 50, seed=seed + 2, include_boundary=False)
            checks.append(check("flatten_to_zero", flatten_error(model, flat), 1e-10))
    return checks
