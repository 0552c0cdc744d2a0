"""
Twistor space: J±, the Reznikov form, integrability and metric comparison.
"""

import math

import numpy as np
import pytest

from services.errors import ArgumentError
from services.metric_catalog import PerturbationSpec, bump_direction, metric_catalog
from services.twistor_geometry import FIBRE_NORTH, fibre_chart_centered, twistor_geometry

X = [0.2, -0.1, 0.3, 0.15]
THETA = [0.6, 0.0, 0.8]


@pytest.fixture
def p():
    return twistor_geometry.point(X, THETA)


def test_fibre_chart_round_trip(rng):
    chart = fibre_chart_centered([1.0, 2.0, -0.5])
    theta = rng.normal(size=3)
    theta /= np.linalg.norm(theta)
    np.testing.assert_allclose(chart.from_zeta(chart.to_zeta(theta)), theta, atol=1e-12)


def test_point_rejects_non_unit_theta():
    with pytest.raises(ArgumentError):
        twistor_geometry.point(X, [1.0, 1.0, 0.0])


def test_point_rejects_the_pole_of_its_chart():
    with pytest.raises(ArgumentError):
        twistor_geometry.point(X, [0.0, 0.0, -1.0], FIBRE_NORTH)


def test_fibre_acs_is_orthogonal_complex_structure(round_s4, p):
    g = metric_catalog.metric_values(round_s4, X)
    J = twistor_geometry.fibre_to_acs(p, g)
    np.testing.assert_allclose(J @ J, -np.eye(4), atol=1e-12)
    np.testing.assert_allclose(J.T @ g @ J, g, atol=1e-12)


@pytest.mark.parametrize("sign", [1, -1])
def test_twistor_acs_squares_to_minus_one(round_s4, p, sign):
    J = twistor_geometry.twistor_acs(round_s4, p, sign)
    np.testing.assert_allclose(J @ J, -np.eye(6), atol=1e-11)


def test_twistor_acs_rejects_bad_sign(round_s4, p):
    with pytest.raises(ArgumentError):
        twistor_geometry.twistor_acs(round_s4, p, 0)


def test_reznikov_matrix_is_antisymmetric(round_s4, p):
    W = twistor_geometry.reznikov_matrix(round_s4, p)
    np.testing.assert_allclose(W, -W.T, atol=1e-14)


def test_reznikov_form_pairs_vectors_through_the_matrix(round_s4, p, rng):
    W = twistor_geometry.reznikov_matrix(round_s4, p)
    u, v = rng.normal(size=6), rng.normal(size=6)
    assert twistor_geometry.reznikov_form(round_s4, p, u, v) == pytest.approx(u @ W @ v)
    assert twistor_geometry.reznikov_form(round_s4, p, u, u) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("name", ["flat", "round-s4", "fubini-study-cp2"])
def test_fibre_integral_is_the_sphere_area(name):
    chart = metric_catalog.catalog(name)
    assert twistor_geometry.fibre_integral(chart, X) == pytest.approx(4.0 * math.pi, rel=1e-10)


@pytest.mark.parametrize("name", ["round-s4", "s2xs2"])
def test_reznikov_form_is_closed(name, p):
    chart = metric_catalog.catalog(name)
    assert twistor_geometry.d_omega_check(chart, p) < 1e-6


def test_round_sphere_omega_tames_j_plus(round_s4, p, rng):
    W = twistor_geometry.reznikov_matrix(round_s4, p)
    J = twistor_geometry.twistor_acs(round_s4, p, 1)
    for u in rng.normal(size=(20, 6)):
        assert u @ W @ (J @ u) > 0.0


@pytest.mark.parametrize("name", ["round-s4", "hyperbolic-h4"])
def test_j_plus_integrable_on_conformally_flat_charts(name, p):
    chart = metric_catalog.catalog(name)
    assert twistor_geometry.nijenhuis(chart, p, sign=1) < 1e-4


def test_j_plus_not_integrable_on_product_of_spheres(p):
    chart = metric_catalog.catalog("s2xs2")
    assert twistor_geometry.nijenhuis(chart, p, sign=1) > 1e-2


@pytest.mark.parametrize("name", ["round-s4", "s2xs2", "fubini-study-cp2"])
def test_j_minus_never_integrable(name, p):
    chart = metric_catalog.catalog(name)
    assert twistor_geometry.nijenhuis(chart, p, sign=-1) > 1e-2


def test_holonomy_around_a_loop_matches_omega(round_s4, p):
    u = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    v = np.array([0.0, 1.0, 0.0, 0.0, 0.0, 0.0])
    rotation, omega = twistor_geometry.holonomy_check(round_s4, p, u, v)
    assert abs(omega) > 0.1
    assert abs(rotation) == pytest.approx(abs(omega), rel=5e-2)


def test_comparison_with_itself_is_the_identity(round_s4, p):
    image, d_phi = twistor_geometry.comparison_map(round_s4, round_s4, p)
    assert image is p
    np.testing.assert_array_equal(d_phi, np.eye(6))


def test_conformal_change_keeps_the_fibre_point():
    g = np.diag([1.0, 2.0, 3.0, 4.0])
    theta = np.array(THETA)
    np.testing.assert_allclose(twistor_geometry.compare_theta(g, 5.0 * g, 1, theta), theta, atol=1e-12)


def test_pulled_back_structure_converges_linearly(round_s4):
    direction = bump_direction((0.2, -0.1, 0.3, 0.0), 0.6, tensor=np.diag([1.0, 0.5, 0.0, 0.0]))
    y = twistor_geometry.point(X, THETA).coordinates
    rates = twistor_geometry.j_convergence_rates(round_s4, direction, [1e-3, 1e-2], [y])
    assert rates["distances"][0] < rates["distances"][1]
    assert rates["rate"] == pytest.approx(1.0, abs=0.2)


def test_eguchi_hanson_form_is_horizontally_degenerate():
    chart = metric_catalog.catalog("eguchi-hanson")
    p = twistor_geometry.point([1.2, 0.3, -0.4, 0.5], THETA)
    H = twistor_geometry.twistor_frame(chart, p).horizontal
    W = twistor_geometry.reznikov_matrix(chart, p)
    np.testing.assert_allclose(H.T @ W @ H, 0.0, atol=1e-6)


@pytest.mark.parametrize("name", ["hyperbolic-h4", "s2xs2", "complex-hyperbolic-ch2"])
def test_fibre_integral_on_curved_charts(name):
    chart = metric_catalog.catalog(name)
    x = [0.1, -0.2, 0.15, 0.05]
    assert twistor_geometry.fibre_integral(chart, x) == pytest.approx(4.0 * math.pi, abs=1e-6)


def _in_span(basis, vectors):
    coef, *_ = np.linalg.lstsq(basis, vectors, rcond=None)
    return float(np.max(np.abs(basis @ coef - vectors)))


@pytest.mark.parametrize("name", ["round-s4", "hyperbolic-h4", "s2xs2"])
@pytest.mark.parametrize("sign", [1, -1])
def test_twistor_acs_preserves_the_splitting(name, sign, p):
    chart = metric_catalog.catalog(name)
    frame = twistor_geometry.twistor_frame(chart, p)
    J = twistor_geometry.twistor_acs(chart, p, sign)
    assert _in_span(frame.vertical, J @ frame.vertical) < 1e-10
    assert _in_span(frame.horizontal, J @ frame.horizontal) < 1e-10


@pytest.mark.parametrize("name", ["flat", "hyperbolic-h4"])
def test_reznikov_form_is_closed_after_a_perturbation(name, p):
    direction = bump_direction((0.1, 0.0, 0.2, 0.0), 0.5, tensor=np.diag([1.0, 0.5, 0.25, 0.0]))
    base = metric_catalog.catalog(name)
    chart = metric_catalog.perturb(PerturbationSpec(base=base, direction=direction, amplitude=0.05))
    assert twistor_geometry.d_omega_check(chart, p) < 1e-5


def test_hyperbolic_omega_tames_j_minus(rng):
    chart = metric_catalog.catalog("hyperbolic-h4")
    for x in ([0.0, 0.0, 0.0, 0.0], X, [-0.3, 0.25, 0.0, 0.4]):
        theta = rng.normal(size=3)
        point = twistor_geometry.point(x, theta / np.linalg.norm(theta))
        W = twistor_geometry.reznikov_matrix(chart, point)
        J = twistor_geometry.twistor_acs(chart, point, -1)
        for u in rng.normal(size=(20, 6)):
            assert u @ W @ (J @ u) > 0.0


def test_eguchi_hanson_fibre_integral_is_the_sphere_area():
    chart = metric_catalog.catalog("eguchi-hanson")
    x = [1.2, 0.3, -0.4, 0.5]
    assert twistor_geometry.fibre_integral(chart, x) == pytest.approx(4.0 * math.pi, abs=1e-6)
