import numpy as np
import pytest

from acxlab.boundary.experiments import (admissible_limit_experiment, curve_verdict, fatou_scan,
                                         normal_curve, siegel_edge_grid, tangential_curve, transversality)
from acxlab.boundary.fields import catalog, check_bounds, load_catalog, siegel_samples
from acxlab.boundary.foliation import foliate_generic
from acxlab.boundary.regions import ApproachRegion, delta_dist, in_region, sample_approach
from acxlab.core.chart import AlmostComplexChart
from acxlab.core.levi import model_defining_function
from acxlab.errors import EmptyShell, OutsideDomain, TotallyRealFailure
from acxlab.suites import random_polynomial_chart

RHO = model_defining_function(2)
ORIGIN = np.zeros(2, complex)


def siegel_region(alpha=2.0, kind="admissible"):
    return ApproachRegion(ORIGIN, alpha, RHO, kind)


# -- regions ------------------------------------------------------------------------

@pytest.mark.parametrize("t", [0.3, 1e-2, 1e-5])
def test_delta_dist_on_normal_axis(t):
    delta, d, dist = delta_dist(siegel_region(), np.array([0, -1j * t]))
    assert delta == pytest.approx(t) and d == pytest.approx(t) and dist == pytest.approx(t)


def test_delta_dist_rejects_boundary_and_outside():
    with pytest.raises(OutsideDomain):
        delta_dist(siegel_region(), ORIGIN)
    with pytest.raises(OutsideDomain):
        delta_dist(siegel_region(), np.array([0.01, 0]))


def test_membership_examples():
    t = 1e-3
    assert in_region(siegel_region(2.0), np.array([0, -1j * t])).inside
    assert not in_region(siegel_region(0.5), np.array([0, t - 1j * t * t * 1.01]), check=False).inside
    assert in_region(siegel_region(2.0), np.array([t, -2j * t * t])).inside


def test_tangential_curve_leaves_every_region():
    tau = tangential_curve()
    for alpha in (0.5, 2.0, 8.0):
        pts = tau(np.array([1e-3, 1e-4, 1e-5]))
        # rho = -t^2 < 0 on the curve
        assert np.all(RHO(pts) < 0)
        assert not np.any(in_region(siegel_region(alpha), pts).inside)


def test_membership_monotone_in_alpha():
    rng = np.random.default_rng(0)
    q = 0.1 * (rng.standard_normal((1000, 2)) + 1j * rng.standard_normal((1000, 2)))
    q = q[RHO(q) < 0]
    for kind in ("cone", "admissible"):
        small = in_region(siegel_region(1.0, kind), q).inside
        big = in_region(siegel_region(4.0, kind), q).inside
        assert np.all(big[small])


def test_delta_modes_agree_on_normal_axis():
    q = np.array([0, -1e-3j])
    vals = [delta_dist(ApproachRegion(ORIGIN, 2.0, RHO, delta_mode=m), q)[0] for m in
            ("proxy", "tangent", "geometric")]
    assert np.allclose(vals, 1e-3, rtol=1e-6)


def test_cone_samples_satisfy_cone_inequality():
    reg = siegel_region(2.0, "cone")
    s = sample_approach(reg, count=16, seed=3, ks=range(3, 12))
    for z in s.points:
        delta, _, dist = delta_dist(reg, z)
        assert np.all(dist < 2.0 * delta)


def test_admissible_samples_reach_tangentially():
    reg = siegel_region(2.0)
    s = sample_approach(reg, count=100, seed=1, ks=range(3, 13))
    z, delta = s.flat(), np.concatenate(s.deltas)
    ratio = np.abs(z[:, 0]) / np.sqrt(delta)
    assert np.max(ratio) > 0.8
    assert np.all(in_region(reg, z).inside)


def test_sampler_is_seeded():
    a = sample_approach(siegel_region(), count=8, seed=5, ks=range(3, 8))
    b = sample_approach(siegel_region(), count=8, seed=5, ks=range(3, 8))
    assert np.array_equal(a.flat(), b.flat())


def test_tiny_aperture_shell_needs_depth_below_aperture():
    # on the normal ray dist^2 < alpha delta means t < alpha, so the 2^-3 shell is empty
    reg = siegel_region(0.01)
    with pytest.raises(EmptyShell) as info:
        sample_approach(reg, count=4, ks=[3])
    assert info.value.scale == 2.0 ** -3
    assert len(sample_approach(reg, count=4, ks=[8]).points[0]) == 4


# -- fields -------------------------------------------------------------------------

def test_catalog_bounds_hold():
    pts = siegel_samples(count=2000)
    for f in catalog().values():
        assert check_bounds(f, pts).passed, f.name
    assert set(load_catalog(samples=pts)) == set(catalog())


def test_exp_inverse_is_holomorphic_and_bounded():
    f = catalog()["exp_inv"]
    pts = siegel_samples(count=500)
    assert np.max(np.abs(f(pts))) <= 1
    assert np.max(f.dbar_j(pts)) == 0


# -- experiments --------------------------------------------------------------------

def test_constant_field_limit():
    f = catalog()["const"]
    res = admissible_limit_experiment(f, siegel_region(), ks=range(3, 15))
    assert res.region.status == "limit"
    assert abs(res.region.value - (1 + 0.5j)) < 1e-14
    assert res.agree and res.bound_ok


@pytest.mark.parametrize("alpha", [0.5, 8.0])
def test_exp_inverse_plus_conj_limit_zero(alpha):
    res = admissible_limit_experiment(catalog()["exp_inv_plus_conj"], siegel_region(alpha), seed=2)
    assert res.region.status == "limit"
    assert abs(res.region.value) < 5e-3
    assert res.region.tail_oscillation < 5e-3
    assert res.agree


def test_power_i_has_no_limit():
    res = admissible_limit_experiment(catalog()["power_i"], siegel_region())
    assert res.region.status == "no-limit"
    assert res.curve.status == "no-limit"
    assert min(r["osc"] for r in res.region.table) > 0.1


def test_normal_curve_is_transverse():
    reg = siegel_region()
    tau = normal_curve(reg)
    assert transversality(reg, tau.tangent) == pytest.approx(1.0)
    assert np.all(RHO(tau(np.array([0.1, 0.01]))) < 0)


def test_tangential_curve_rejected_as_designated_curve():
    reg = siegel_region()
    tau = tangential_curve()
    tau.tangent = np.array([0.0, 0.0, 1.0, 0.0])
    with pytest.raises(ValueError):
        admissible_limit_experiment(catalog()["const"], reg, curve=tau)


def test_curve_verdict_along_tangential_curve():
    f = catalog()["exp_inv"]
    v = curve_verdict(f, tangential_curve())
    assert v.status == "no-limit"
    # modulus exp(-1/(1 + t^2)) tends to 1/e while the phase spins
    t = np.array([1e-4, 1e-6])
    assert np.allclose(np.abs(f(tangential_curve()(t))), np.exp(-1 / (1 + t ** 2)), rtol=1e-8)


def test_fatou_scan_continuous_field_and_threads():
    pts = siegel_edge_grid(3, 3)
    assert np.allclose(RHO(pts), 0, atol=1e-15)
    a = fatou_scan(catalog()["coord_z1"], pts, seed=4, threads=1)
    b = fatou_scan(catalog()["coord_z1"], pts, seed=4, threads=3)
    assert a.fraction == 1.0
    assert a.statuses() == b.statuses()
    assert all(x.region.value == y.region.value for x, y in zip(a.results, b.results))


def test_fatou_exceptional_point():
    res = fatou_scan(catalog()["power_i"], ORIGIN[None, :])
    assert res.statuses() == ["no-limit"]


# -- foliation ----------------------------------------------------------------------

def flat(u):
    return np.array([u[0] + 1j * u[1], 1j * u[2]])


def complex_line(u):
    return np.array([u[1] + 1j * u[2], u[0]])


def test_flat_submanifold_certified():
    certs = foliate_generic(flat, 1, [[0.0], [0.5]], [[0.1, 0.2], [-0.3, 0.0]])
    assert all(c.certified for c in certs)
    assert np.allclose(certs[0].sigma_min, 1.0)


def test_complex_line_fails():
    with pytest.raises(TotallyRealFailure):
        foliate_generic(complex_line, 1, [[0.0]], [[0.1, 0.2]])


def test_perturbed_flat_under_small_structure():
    rng = np.random.default_rng(2)
    chart = random_polynomial_chart(2, rng, size=0.05)

    def bent(u):
        z = flat(u)
        return z + 0.05 * np.array([u[1] ** 2, u[0] * u[2]])

    certs = foliate_generic(bent, 1, [[0.0], [0.2]], [[0.1, 0.2], [0.3, -0.1]], chart=chart)
    assert all(c.certified for c in certs)
    assert min(c.sigma_min.min() for c in certs) > 0.5


def test_foliation_checks_dimensions():
    with pytest.raises(ValueError):
        foliate_generic(flat, 2, [[0.0]], [[0.1, 0.2]])
    assert AlmostComplexChart.standard(2).n == 2
