import numpy as np
import pytest

from acxlab.boundary.experiments import pullback_subsolution
from acxlab.boundary.fields import conj_coordinate, coordinate, exp_inverse
from acxlab.core.chart import AlmostComplexChart, pushforward
from acxlab.core.levi import model_defining_function
from acxlab.core.model import ModelStructure, model_chart
from acxlab.core.poly import Poly
from acxlab.disc.grid import DiscGrid, nodes
from acxlab.disc.solver import (HolomorphicDatum, contraction_ratios, disc_residual, fill_admissible,
                                levi_via_disc, model_disc_family, solve_disc, transverse_normal_disc)
from acxlab.errors import AnchorOutsideCone, IterateLeftChart, NoConvergence, OutsideDomain
from acxlab.suites import random_polynomial_chart, random_transformation, sample_u


def perturbed_model(mu, eps, radius=0.5):
    model = ModelStructure(2, mu)
    polys = model.a0_polys()
    z1, z2 = Poly.var(2, 0), Poly.var(2, 1)
    polys[0][1] = polys[0][1] + eps * z1 * Poly.var(2, 1, conj=True)
    polys[1][1] = polys[1][1] + eps * (z2 * z2 + Poly.var(2, 0, conj=True) * z1)
    polys[0][0] = polys[0][0] + eps * Poly.var(2, 0, conj=True) ** 2
    return model, AlmostComplexChart.from_polys(polys, radius)


# -- residuals ----------------------------------------------------------------------

def test_residual_holomorphic_disc_standard():
    z = DiscGrid.from_function(lambda s: np.stack([s ** 2, s], -1) * 0.5, 64, 64)
    assert disc_residual(AlmostComplexChart.standard(2), z) < 1e-12


def test_residual_antiholomorphic_disc_is_one():
    z = DiscGrid.from_function(lambda s: np.stack([np.conj(s), 0 * s], -1) * 0.5, 64, 64)
    assert disc_residual(AlmostComplexChart.standard(2), z) == pytest.approx(0.5, rel=1e-10)
    z = DiscGrid.from_function(lambda s: np.stack([np.conj(s), 0 * s], -1), 64, 64)
    assert disc_residual(AlmostComplexChart.standard(2, radius=2.0), z) == pytest.approx(1.0, rel=1e-10)


def test_residual_rejects_disc_outside_chart():
    z = DiscGrid.from_function(lambda s: np.stack([2 * s, 0 * s], -1), 16, 16)
    with pytest.raises(OutsideDomain):
        disc_residual(AlmostComplexChart.standard(2), z)


# -- solver -------------------------------------------------------------------------

def test_solver_identity_on_standard_structure():
    datum = HolomorphicDatum(np.array([[0, 0], [0.5, 0]]))
    sol = solve_disc(AlmostComplexChart.standard(2), datum)
    assert sol.iterations == 1
    assert np.max(np.abs(sol.z.values - datum.grid().values)) < 1e-15


@pytest.mark.parametrize("mu", [[[0.5]], [[0.3 - 0.6j]]])
def test_solver_matches_model_family(mu):
    model = ModelStructure(2, mu)
    fam, _ = model_disc_family(model, [1.0], -0.02j)
    sol = solve_disc(model_chart(model, 0.5), fam.datum())
    assert np.max(np.abs(sol.z.values - fam.grid().values)) < 1e-6


def test_solver_perturbed_model_contracts():
    model, chart = perturbed_model([[0.5]], 1e-2)
    fam, _ = model_disc_family(model, [1.0], -0.02j)
    sol = solve_disc(chart, fam.datum(), tol=1e-8, max_iter=30)
    assert sol.residual < 1e-8
    assert np.all(contraction_ratios(sol.history) < 0.5)


def test_solver_no_convergence_reports_history():
    _, chart = perturbed_model([[0.5]], 1e-2)
    datum = HolomorphicDatum(np.array([[0, -0.02j], [0.1, 0]]))
    with pytest.raises(NoConvergence) as info:
        solve_disc(chart, datum, tol=1e-30, max_iter=2)
    assert len(info.value.history) == 2


def test_solver_iterate_left_chart():
    datum = HolomorphicDatum(np.array([[0, 0], [0.6, 0]]))
    with pytest.raises(IterateLeftChart):
        solve_disc(AlmostComplexChart.standard(2, radius=0.5), datum)


def test_solution_artifacts():
    sol = solve_disc(AlmostComplexChart.standard(2), HolomorphicDatum(np.array([[0, 0], [0.5, 0]])),
                     n_r=8, n_theta=8)
    assert sol.to_csv().startswith("# ")
    assert '"iterations": 1' in sol.sidecar_json()


def test_pushforward_maps_discs_to_discs():
    rng = np.random.default_rng(7)
    chart = random_polynomial_chart(2, rng, size=0.2)
    tf = random_transformation(2, rng, 0.05)
    sol = solve_disc(chart, HolomorphicDatum(np.array([[0.05, -0.02j], [0.1, 0.05]])))
    image = DiscGrid(tf(sol.z.values))
    assert disc_residual(pushforward(chart, tf), image) < 1e-6


# -- model families -----------------------------------------------------------------

def test_family_trivial_model():
    fam, params = model_disc_family(ModelStructure(2, [[0]]), [1.0], -0.01j)
    assert params.c == 0
    assert np.allclose(fam.grid().values[..., 1], -0.01j)


@pytest.mark.parametrize("mu", [[[1.0]], [[0.4j]], [[0.2, 0.1], [0.3j, -0.5]]])
def test_family_residual_and_constant_imaginary_part(mu):
    mu = np.asarray(mu, complex)
    model = ModelStructure(mu.shape[0] + 1, mu)
    v = np.ones(mu.shape[0]) / np.sqrt(mu.shape[0])
    fam, params = model_disc_family(model, v, 0.01 - 0.03j)
    chart = model_chart(model, 0.5)
    assert disc_residual(chart, fam) < 1e-12
    assert disc_residual(chart, fam.grid()) < 1e-10
    zn = fam.grid().values[..., -1]
    assert np.ptp(zn.imag) < 1e-15


def test_family_rejects_anchor_outside_cone():
    with pytest.raises(AnchorOutsideCone):
        model_disc_family(ModelStructure(2, [[0.5]]), [1.0], 1.0 - 0.01j)


def test_normal_disc():
    model = ModelStructure(2, [[0.7]])
    disc = transverse_normal_disc(model)
    assert disc_residual(model_chart(model, 5.0, margin=-np.inf), disc) == 0.0
    rho = model_defining_function(2)
    assert np.all(rho(disc.grid().values) < 0)
    x = np.linspace(-3, 3, 11)
    assert np.all(rho(disc.halfplane(x)) == 0)


def test_fill_admissible_siegel():
    t = 0.1
    anchor = -2j * t ** 2
    cover = fill_admissible(ModelStructure(2, [[0]]), 2.0, anchor, count=8)
    for d in cover.discs:
        assert d.params.c == 0
    assert cover.distance(np.array([t, anchor])) < 1e-2
    for d in cover.discs:
        assert np.allclose(d(np.array(0j)), [0, anchor], atol=1e-15)
    # radius scales like |Im anchor|^(1/2) up to the |z_n|^2 term
    small = fill_admissible(ModelStructure(2, [[0]]), 2.0, anchor / 4, count=1)
    assert cover.radii[0] / small.radii[0] == pytest.approx(2.0, rel=1e-2)


def test_levi_routes_agree():
    rng = np.random.default_rng(8)
    chart = random_polynomial_chart(2, rng, size=0.3)
    rep = levi_via_disc(chart, sample_u(2), np.array([0.1, -0.05j]), np.array([0.6, 0.8j]))
    assert rep.normalized_difference < 2e-4


# -- pullbacks ----------------------------------------------------------------------

def test_pullback_holomorphic_field_standard():
    z = HolomorphicDatum(np.array([[0.1, 0], [0.3, 0.2]])).grid()
    rep = pullback_subsolution(coordinate(0), z)
    assert rep.sup_dbar < 1e-10 and rep.certified


def test_pullback_conj_coordinate():
    v = np.array([0.6 - 0.3j, 0.2])
    z = DiscGrid(nodes(64, 64)[..., None] * v)
    rep = pullback_subsolution(conj_coordinate(0), z)
    from acxlab.disc.grid import dbar_grid
    assert np.max(np.abs(dbar_grid(rep.values).values - np.conj(v[0]))) < 1e-12


def test_pullback_exp_inverse_on_normal_disc():
    disc = transverse_normal_disc(ModelStructure(2, [[0.5]]))
    rep = pullback_subsolution(exp_inverse(), disc.grid())
    assert rep.sup_dbar < 1e-6 * rep.values.sup()
