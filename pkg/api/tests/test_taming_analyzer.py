"""
Taming margin, point classification, pinching and region scans.
"""

import math

import numpy as np
import pytest

from models.geometry import CurvatureBlocks
from models.taming import GridShape, GridSpec, RegionClass, TamingClass
from services.curvature_engine import curvature_engine
from services.errors import ArgumentError
from services.metric_catalog import metric_catalog
from services.taming_analyzer import fibonacci_sphere, kink_curve, margin_values, taming_analyzer


def _blocks(A, B) -> CurvatureBlocks:
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    return CurvatureBlocks(R6=np.zeros((6, 6)), A=A, B=B, C=np.zeros((3, 3)),
                           ricci=np.zeros((4, 4)), scalar=0.0)


def _rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def test_fibonacci_sphere_points_are_unit():
    pts = fibonacci_sphere(100)
    assert pts.shape == (100, 3)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-14)
    with pytest.raises(ArgumentError):
        fibonacci_sphere(0)


def test_margin_values_formula(rng):
    A, B = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
    thetas = fibonacci_sphere(5)
    expected = [abs(t @ A @ t) - np.linalg.norm(B @ t) for t in thetas]
    np.testing.assert_allclose(margin_values(A, B, thetas), expected, atol=1e-14)


def test_identity_tames_j_plus():
    verdict = taming_analyzer.classify(_blocks(np.eye(3), np.zeros((3, 3))))
    assert verdict.margin == pytest.approx(1.0, abs=1e-12)
    assert verdict.taming_class == TamingClass.TAMED_J_PLUS
    assert verdict.detA == pytest.approx(1.0)
    assert not verdict.degenerate


def test_negative_definite_a_tames_j_minus():
    verdict = taming_analyzer.classify(_blocks(-2.0 * np.eye(3), 0.5 * np.eye(3)))
    assert verdict.margin == pytest.approx(1.5, abs=1e-12)
    assert verdict.taming_class == TamingClass.TAMED_J_MINUS


def test_indefinite_a_is_degenerate():
    verdict = taming_analyzer.classify(_blocks(np.diag([1.0, 1.0, -1.0]), np.zeros((3, 3))))
    assert verdict.taming_class == TamingClass.NOT_TAMED
    assert verdict.degenerate
    theta = np.array(verdict.argmin_theta)
    assert abs(theta @ np.diag([1.0, 1.0, -1.0]) @ theta) < 1e-8


def test_large_b_defeats_taming():
    verdict = taming_analyzer.classify(_blocks(2.0 * np.eye(3), 2.5 * _rotation(0.7)))
    assert verdict.margin == pytest.approx(-0.5, abs=1e-10)
    assert verdict.taming_class == TamingClass.NOT_TAMED
    assert verdict.tamed is False


def _random_pair(rng):
    A = rng.normal(size=(3, 3))
    A = A + A.T
    B = rng.normal(size=(3, 3))
    return A / np.linalg.norm(A), B / np.linalg.norm(B)


def _random_rotation(rng) -> np.ndarray:
    Q, R = np.linalg.qr(rng.normal(size=(3, 3)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def test_kink_curve_lies_on_the_kink(rng):
    A, _ = _random_pair(rng)
    while np.all(np.linalg.eigvalsh(A) > 0) or np.all(np.linalg.eigvalsh(A) < 0):
        A, _ = _random_pair(rng)
    curve = kink_curve(A, 500)
    assert curve.shape == (500, 3)
    np.testing.assert_allclose(np.linalg.norm(curve, axis=1), 1.0, atol=1e-13)
    np.testing.assert_allclose(np.einsum("ni,ij,nj->n", curve, A, curve), 0.0, atol=1e-13)
    assert kink_curve(np.eye(3), 10).shape == (0, 3)


def test_margin_minimum_on_the_kink():
    # on θ1² = θ2² + θ3²/2 the largest |Bθ| is √2 at θ3 = 0
    A = np.diag([1.0, -1.0, 0.5])
    B = np.diag([2.0, 0.0, 0.0])
    margin, theta = taming_analyzer.taming_margin(A, B)
    assert margin == pytest.approx(-math.sqrt(2.0), abs=1e-12)
    np.testing.assert_allclose(np.abs(theta), [2 ** -0.5, 2 ** -0.5, 0.0], atol=1e-8)


def test_margin_matches_dense_oracle():
    rng = np.random.default_rng(4)
    for _ in range(100):
        A, B = _random_pair(rng)
        margin, theta = taming_analyzer.taming_margin(A, B)
        dense = taming_analyzer.dense_margin(A, B)
        assert margin <= dense + 1e-12
        assert dense - margin < 1e-4
        assert np.linalg.norm(theta) == pytest.approx(1.0)


def test_margin_is_rotation_invariant():
    rng = np.random.default_rng(5)
    for _ in range(25):
        A, B = _random_pair(rng)
        Q = _random_rotation(rng)
        margin, theta = taming_analyzer.taming_margin(A, B)
        rotated, rotated_theta = taming_analyzer.taming_margin(Q @ A @ Q.T, Q @ B @ Q.T)
        assert rotated == pytest.approx(margin, abs=1e-9)
        mapped = Q @ theta
        assert min(np.linalg.norm(rotated_theta - mapped),
                   np.linalg.norm(rotated_theta + mapped)) < 1e-5


def test_margin_scales_linearly(rng):
    A, B = _random_pair(rng)
    margin, _ = taming_analyzer.taming_margin(A, B)
    for c in (1e-3, 7.0, 250.0):
        scaled, _ = taming_analyzer.taming_margin(c * A, c * B)
        assert scaled == pytest.approx(c * margin, abs=1e-9 * c)


def test_margin_is_even_in_theta(rng):
    A, B = _random_pair(rng)
    _, theta = taming_analyzer.taming_margin(A, B)
    values = margin_values(A, B, np.array([theta, -theta]))
    assert values[0] == values[1]


def test_margin_rejects_wrong_shapes():
    with pytest.raises(ArgumentError):
        taming_analyzer.taming_margin(np.eye(2), np.eye(3))


@pytest.mark.parametrize("kmin,kmax,ratio,ok", [
    (1.0, 1.0, 1.0, True),
    (0.3, 1.0, 0.3, False),
    (-1.0, -0.5, 0.5, True),
])
def test_pinching_from_range(kmin, kmax, ratio, ok):
    verdict = taming_analyzer.pinching_from_range(kmin, kmax)
    assert verdict.ratio == pytest.approx(ratio)
    assert verdict.satisfies_2_5 is ok


def test_mixed_sign_curvature_is_never_pinched():
    verdict = taming_analyzer.pinching_from_range(-1.0, 1.0)
    assert verdict.ratio == -math.inf
    assert not verdict.satisfies_2_5


def test_round_sphere_is_pinched(round_s4):
    assert taming_analyzer.pinching_verdict(round_s4, np.zeros(4), n_planes=64).satisfies_2_5


def test_region_scan_round_sphere(round_s4):
    report = taming_analyzer.region_scan(round_s4, GridSpec(radius=0.5, n=2))
    assert report.region_class == RegionClass.TAMED_J_PLUS
    assert report.tamed_points == 16
    assert report.min_margin == pytest.approx(1.0, abs=1e-8)


def test_region_scan_hyperbolic_tames_j_minus():
    chart = metric_catalog.catalog("hyperbolic-h4")
    report = taming_analyzer.region_scan(chart, GridSpec(shape=GridShape.BALL, radius=0.4, n=3))
    assert report.region_class == RegionClass.TAMED_J_MINUS


def test_region_scan_flat_is_untamed(flat):
    report = taming_analyzer.region_scan(flat, GridSpec(n=2))
    assert report.region_class == RegionClass.UNTAMED
    assert all(p.verdict.degenerate for p in report.points)


def test_region_scan_records_points_outside_the_domain():
    chart = metric_catalog.catalog("hyperbolic-h4")
    report = taming_analyzer.region_scan(chart, GridSpec(radius=0.9, n=2))
    # the box corners |x| = 1.8 leave the unit ball
    assert report.error_points == 16
    assert report.region_class == RegionClass.UNTAMED
    assert math.isnan(report.min_margin)


def test_complex_hyperbolic_reversed_tames_j_minus():
    chart = metric_catalog.catalog("complex-hyperbolic-ch2")
    assert chart.orientation == -1
    report = taming_analyzer.region_scan(chart, GridSpec(radius=0.2, n=2))
    assert report.region_class == RegionClass.TAMED_J_MINUS


@pytest.mark.parametrize("name,x", [
    ("flat", [0.2, 0.1, -0.3, 0.4]),
    ("eguchi-hanson", [1.2, 0.3, -0.4, 0.5]),
])
def test_ricci_flat_anti_self_dual_charts_have_zero_margin(name, x):
    verdict = taming_analyzer.classify(curvature_engine.blocks_at(metric_catalog.catalog(name), x))
    assert verdict.margin == pytest.approx(0.0, abs=1e-6)
