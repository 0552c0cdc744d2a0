"""
Hyperkähler triples on the bolt and the product twistor structures built from them.
"""

import numpy as np
import pytest

from services.errors import ArgumentError, ChartNotHyperkaehlerError
from services.hyperkaehler import (
    FIBRE_I1, hyperkaehler_service, product_transition, product_transition_jacobian,
)
from services.metric_catalog import metric_catalog

BOLT_POINTS = [
    np.array([0.3, -0.2, 0.4, 0.1]),
    np.array([-0.5, 0.6, -0.2, 0.3]),
    np.array([0.1, 0.9, 0.05, -0.4]),
]
Y = np.array([0.3, -0.2, 0.4, 0.1, 0.25, -0.15])


@pytest.fixture(scope="module")
def triple():
    return hyperkaehler_service.hk_triple(metric_catalog.bolt_chart(1))


def test_round_sphere_has_no_triple(round_s4):
    with pytest.raises(ChartNotHyperkaehlerError):
        hyperkaehler_service.hk_triple(round_s4)


def test_bolt_triple_is_quaternionic_and_parallel(triple):
    check = hyperkaehler_service.verify_triple(triple, BOLT_POINTS)
    assert check.quaternion < 1e-10
    assert check.orthogonality < 1e-10
    assert check.closedness < 1e-6
    assert check.parallel < 1e-6


def test_second_bolt_chart_triple_is_parallel():
    triple2 = hyperkaehler_service.hk_triple(metric_catalog.bolt_chart(2))
    check = hyperkaehler_service.verify_triple(triple2, BOLT_POINTS[:2])
    assert check.parallel < 1e-6


def test_flat_triple_is_constant(flat):
    triple = hyperkaehler_service.hk_triple(flat)
    check = hyperkaehler_service.verify_triple(triple, [np.zeros(4)])
    assert check.closedness == pytest.approx(0.0, abs=1e-12)
    assert check.parallel == pytest.approx(0.0, abs=1e-12)


def test_holomorphic_form_combines_omega_2_and_3(triple):
    W = triple.forms(BOLT_POINTS[0])
    np.testing.assert_allclose(triple.holomorphic_form(BOLT_POINTS[0]), W[1] + 1j * W[2])


@pytest.mark.parametrize("x", BOLT_POINTS)
def test_theta_rotation_is_a_rotation(triple, x):
    R = hyperkaehler_service.theta_rotation(triple, x)
    np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-10)
    assert abs(np.linalg.det(R)) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("sign", [1, -1])
def test_product_acs_is_a_complex_structure(triple, sign):
    J = hyperkaehler_service.product_twistor_acs(triple, Y, sign)
    np.testing.assert_allclose(J @ J, -np.eye(6), atol=1e-12)


def test_product_acs_rejects_bad_sign(triple):
    with pytest.raises(ArgumentError):
        hyperkaehler_service.product_twistor_acs(triple, Y, 2)


@pytest.mark.parametrize("sign", [1, -1])
def test_product_coordinates_recover_the_twistor_structure(triple, sign):
    product = hyperkaehler_service.product_twistor_acs(triple, Y, sign)
    aligned = hyperkaehler_service.aligned_twistor_acs(triple, Y, sign)
    np.testing.assert_allclose(aligned, product, atol=1e-6)


def test_product_form_tames_the_fibre(triple):
    W = hyperkaehler_service.product_form(Y, FIBRE_I1)
    J = hyperkaehler_service.product_twistor_acs(triple, Y, 1)
    v = np.array([0.0, 0.0, 0.0, 0.0, 1.0, 0.5])
    assert v @ W @ (J @ v) > 0.0
    np.testing.assert_array_equal(W[:4, :4], np.zeros((4, 4)))


def test_product_structure_agrees_across_charts():
    target = hyperkaehler_service.product_structure(1)
    y = np.array([0.7, 0.4, 0.3, -0.2, 0.3, -0.2])
    y2 = product_transition(y)
    D = product_transition_jacobian(y)
    np.testing.assert_allclose(target.acs(1, y2) @ D, D @ target.acs(0, y), atol=1e-9)


def test_geodesic_with_zero_velocity_stays_put():
    target = hyperkaehler_service.product_structure(1)
    end, velocity = hyperkaehler_service.geodesic_exp(target, 0, Y, np.zeros(6))
    np.testing.assert_array_equal(end, Y)
    np.testing.assert_array_equal(velocity, np.zeros(6))


def test_transport_preserves_length():
    target = hyperkaehler_service.product_structure(1)
    v = np.array([0.01, -0.02, 0.0, 0.01, 0.02, 0.0])
    vector = np.array([0.0, 1.0, 0.0, 0.0, 0.5, 0.0])

    def norm2(c, y, w):
        g = np.zeros((6, 6))
        g[:4, :4] = metric_catalog.metric_values(target.charts[c], y[:4])
        g[4:, 4:] = (4.0 / (1.0 + y[4:] @ y[4:]) ** 2) * np.eye(2)
        return w @ g @ w

    end, _ = hyperkaehler_service.geodesic_exp(target, 0, Y, v, steps=8)
    moved = hyperkaehler_service.transport(target, 0, Y, v, vector, steps=8)
    assert norm2(0, end, moved) == pytest.approx(norm2(0, Y, vector), rel=1e-8)


def test_unperturbed_structure_is_the_product():
    target = hyperkaehler_service.perturbed_structure(0.0)
    product = hyperkaehler_service.product_structure(1)
    np.testing.assert_array_equal(target.acs(0, Y), product.acs(0, Y))


def test_perturbed_structure_matches_product_outside_the_bump():
    target = hyperkaehler_service.perturbed_structure(1e-2)
    product = hyperkaehler_service.product_structure(1)
    far = np.array([1.5, 0.0, 0.8, 0.0, 0.1, 0.1])
    np.testing.assert_array_equal(target.acs(0, far), product.acs(0, far))
    near = np.array([0.0, 0.0, 0.15, 0.0, 0.1, 0.1])
    J = target.acs(0, near)
    np.testing.assert_allclose(J @ J, -np.eye(6), atol=1e-8)
    assert np.max(np.abs(J - product.acs(0, near))) > 1e-5
