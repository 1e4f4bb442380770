import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from acxlab.disc.cauchy import CauchyGreen, cauchy_integral
from acxlab.disc.grid import (BoundaryTrace, DiscGrid, RadialSpectral, dbar_grid, dz_grid, grid_from_csv,
                              grid_to_csv, trace_from_csv, trace_to_csv)
from acxlab.disc.schwarz import (SMOOTH_SAMPLES, decompose_subsolution, generalized_cauchy_error,
                                 holder_check, nontangential_limit_estimate)
from acxlab.errors import EvaluationTooCloseToBoundary
from acxlab.limits import diameter, judge


def rel_l2(a, b):
    return (a - b).l2_norm() / b.l2_norm()


# -- grids and derivatives --------------------------------------------------------

def test_cell_areas_sum_to_pi():
    g = DiscGrid(np.zeros((32, 16)))
    assert g.cell_areas.sum() == pytest.approx(np.pi, rel=1e-14)


def test_grid_rejects_odd_theta():
    with pytest.raises(ValueError):
        DiscGrid(np.zeros((4, 5)))


@pytest.mark.parametrize("f, expected", [
    (lambda z: z, lambda z: 0 * z),
    (lambda z: np.conj(z), lambda z: 1 + 0 * z),
    (lambda z: np.abs(z) ** 2, lambda z: z),
])
def test_dbar_examples(f, expected):
    g = DiscGrid.from_function(f, 64, 64)
    err = dbar_grid(g).values - expected(g.nodes)
    assert np.max(np.abs(err)) < 1e-10


def test_dz_of_smooth_function():
    g = DiscGrid.from_function(lambda z: z ** 2 * np.conj(z), 64, 64)
    err = dz_grid(g).values - 2 * g.nodes * np.conj(g.nodes)
    assert np.max(np.abs(err)) < 1e-9


def test_grid_csv_roundtrip():
    g = DiscGrid.from_function(lambda z: np.stack([np.exp(z), np.conj(z) / 3], -1), 8, 6)
    back, meta = grid_from_csv(grid_to_csv(g, meta={"kind": "test"}))
    assert meta["kind"] == "test"
    assert np.array_equal(back.values, g.values)


def test_trace_csv_roundtrip():
    t = BoundaryTrace.from_function(lambda w: np.sin(w) / 7, 16)
    back, _ = trace_from_csv(trace_to_csv(t))
    assert np.array_equal(back.values, t.values)


def test_radial_spectral_interpolates_off_grid():
    f = SMOOTH_SAMPLES["exp_mixed"]
    ev = RadialSpectral(DiscGrid.from_function(f, 64, 32))
    pts = np.array([0.0, 0.3 + 0.2j, -0.5j, 0.9 * np.exp(0.7j)])
    assert np.max(np.abs(ev(pts) - f(pts))) < 1e-8


# -- Cauchy-Green transform ----------------------------------------------------------

def test_T_of_zero_is_zero():
    T = CauchyGreen(DiscGrid(np.zeros((32, 32))))
    assert np.all(T.on_grid().values == 0)
    assert np.all(T(np.array([0.2, 1.5j])) == 0)


def test_T_of_one():
    T = CauchyGreen(DiscGrid(np.ones((64, 64))))
    g = T.on_grid()
    assert np.max(np.abs(g.values - np.conj(g.nodes))) < 1e-12
    out = np.array([1.5, -2j, 1.2 * np.exp(0.4j)])
    assert np.max(np.abs(T(out) - 1 / out)) < 1e-12


def test_T_of_zbar_solves_dbar():
    f = DiscGrid.from_function(np.conj, 64, 64)
    tf = CauchyGreen(f).on_grid()
    assert np.max(np.abs(dbar_grid(tf).values - f.values)[:-1]) < 1e-8
    # continuity across the circle
    T = CauchyGreen(f)
    w = np.exp(1j * np.linspace(0, 2 * np.pi, 9))
    assert np.max(np.abs(T((1 - 1e-7) * w) - T((1 + 1e-7) * w))) < 1e-5


def test_T_dbar_identity_converges():
    f = SMOOTH_SAMPLES["exp_mixed"]
    errs = []
    for n_r in (32, 64):
        g = DiscGrid.from_function(f, n_r, 64)
        errs.append(rel_l2(dbar_grid(CauchyGreen(g).on_grid()), g))
    assert errs[1] < 1e-8


# -- Cauchy integral -------------------------------------------------------------

@pytest.mark.parametrize("fstar, expected", [
    (lambda w: 1 + 0 * w, lambda z: 1 + 0 * z),
    (lambda w: w, lambda z: z),
    (np.conj, lambda z: 0 * z),
])
def test_cauchy_integral_examples(fstar, expected):
    K = cauchy_integral(BoundaryTrace.from_function(fstar, 256))
    z = np.array([0.0, 0.5j, -0.3 + 0.4j, 0.9])
    # trapezoid error decays like |zeta|^M
    assert np.max(np.abs(K(z) - expected(z))) < 1e-10


def test_cauchy_integral_guard():
    K = cauchy_integral(BoundaryTrace.from_function(lambda w: w, 64))
    with pytest.raises(EvaluationTooCloseToBoundary):
        K(np.array([0.99]))


@given(st.integers(1, 20), st.floats(0, 0.7), st.floats(0, 2 * np.pi))
@settings(max_examples=30, deadline=None)
def test_cauchy_integral_reproduces_monomials(k, r, t):
    z = r * np.exp(1j * t)
    K = cauchy_integral(BoundaryTrace.from_function(lambda w: w ** k, 256))
    assert abs(K(np.array([z]))[0] - z ** k) < 1e-12


def test_annihilation_of_T_trace():
    f = DiscGrid.from_function(SMOOTH_SAMPLES["cubic_mix"], 64, 64)
    K = cauchy_integral(CauchyGreen(f).boundary_trace(512))
    z = 0.5 * np.exp(1j * np.linspace(0, 2 * np.pi, 17))
    assert np.max(np.abs(K(np.concatenate([z, [0, 0.2j]])))) < 1e-10


# -- decomposition, limits, Hoelder -------------------------------------------------

def test_decompose_holomorphic():
    f = DiscGrid.from_function(lambda z: z ** 3, 64, 64)
    d = decompose_subsolution(f)
    assert d.tpart.sup() < 1e-10
    assert (d.g - f).sup() < 1e-10


def test_decompose_zbar():
    d = decompose_subsolution(DiscGrid.from_function(np.conj, 64, 64))
    assert d.g.sup() < 1e-10


def test_decompose_smooth_residual():
    d = decompose_subsolution(DiscGrid.from_function(SMOOTH_SAMPLES["exp_mixed"], 128, 64))
    assert d.dbar_residual() < 1e-2


def test_generalized_cauchy_small_grid():
    assert generalized_cauchy_error(SMOOTH_SAMPLES["zbar_plus_z2"], n_r=64, n_theta=64, m=512) < 1e-6


def test_nontangential_identity():
    v = nontangential_limit_estimate(lambda z: z, 0.0, 2.0)
    assert v.status == "limit"
    assert abs(v.value - 1) < 1e-3


def singular_inner(z):
    return np.exp((z + 1) / (z - 1))


def test_nontangential_singular_inner_radial():
    v = nontangential_limit_estimate(singular_inner, 0.0, 2.0, radial_only=True)
    assert v.status == "limit"
    assert abs(v.value) < 1e-3


def test_nontangential_singular_inner_at_i():
    v = nontangential_limit_estimate(singular_inner, np.pi / 2, 2.0)
    assert v.status == "limit"
    assert abs(abs(v.value) - 1) < 5e-3


def test_nontangential_rejects_small_aperture():
    with pytest.raises(ValueError):
        nontangential_limit_estimate(lambda z: z, 0.0, 1.0)


def test_holder_constant_function():
    rep = holder_check(DiscGrid(np.full((32, 32), 2.0 + 1j)))
    assert rep.constant < 1e-12


def test_holder_zbar_finite():
    rep = holder_check(DiscGrid.from_function(np.conj, 64, 64))
    assert np.isfinite(rep.constant) and 0 < rep.constant < 10


# -- limit judge ---------------------------------------------------------------------

def test_judge_limit_and_no_limit():
    scales = [2.0 ** -k for k in range(3, 12)]
    conv = [1 + s * np.exp(1j * np.arange(5)) for s in scales]
    assert judge(scales, conv).status == "limit"
    osc = [np.exp(1j * np.arange(5)) for _ in scales]
    assert judge(scales, osc).status == "no-limit"
    slow = [0.05 * np.exp(1j * np.arange(5)) for _ in scales]
    assert judge(scales, slow).status == "inconclusive"


def test_diameter():
    assert diameter([0, 1j, 1]) == pytest.approx(np.sqrt(2))
    assert diameter([3.0]) == 0.0
