"""
Spheres in the product twistor space of the bolt: residuals, Fredholm counts
and continuation.
"""

import numpy as np
import pytest

from models.curves import CROperatorMatrix, SphereGrid
from services.errors import ArgumentError, InconclusiveError
from services.hyperkaehler import hyperkaehler_service
from services.hyperkaehler_curves import HyperkaehlerCurves, index_formula
from services.sphere_grid import SphereDiscretization


@pytest.fixture(scope="module")
def curves():
    return HyperkaehlerCurves(seed=7)


@pytest.fixture(scope="module")
def grid():
    return SphereGrid(n=16)


@pytest.fixture(scope="module")
def product():
    return hyperkaehler_service.product_structure(1)


@pytest.mark.parametrize("genus,expected", [(0, 6), (1, 0), (2, -6)])
def test_index_formula(genus, expected):
    assert index_formula(genus) == expected


def test_index_formula_rejects_negative_genus():
    with pytest.raises(ArgumentError):
        index_formula(-1)


def test_bolt_lift_rejects_non_unit_fibre_point(curves, grid):
    with pytest.raises(ArgumentError):
        curves.bolt_lift(grid, fibre_point=(1.0, 1.0, 0.0))


def test_bolt_lift_rejects_the_fibre_chart_pole(curves, grid):
    with pytest.raises(ArgumentError):
        curves.bolt_lift(grid, fibre_point=(-1.0, 0.0, 0.0))


def test_bolt_lift_is_holomorphic(curves, grid, product):
    u = curves.bolt_lift(grid)
    assert u.values.shape == (2, 16, 16, 6)
    assert u.homotopy_class_tag == "bolt-lift"
    residual = curves.cr_residual(u, product)
    assert residual.sup < 1e-6


def test_constant_map_has_zero_residual(curves, grid, product):
    y = np.array([0.6, 0.2, 0.1, -0.1, 0.2, 0.3])
    u = curves.constant_map(grid, y, product)
    assert curves.cr_residual(u, product).sup < 1e-10


def test_exponentiate_zero_field_is_identity(curves, grid, product):
    u = curves.bolt_lift(grid)
    moved = curves.exponentiate(u, np.zeros(u.values.size), product)
    np.testing.assert_array_equal(moved.values, u.values)


def test_bolt_lift_pulls_back_no_area(curves, grid, product):
    # the product form lives on the fibre and the lift sits at one fibre point
    u = curves.bolt_lift(grid)
    assert curves.sphere_integral(u, product) == pytest.approx(0.0, abs=1e-12)


def test_linearized_operator_is_square(curves, grid, product):
    op = curves.linearize(curves.bolt_lift(grid), product)
    size = 6 * grid.node_count
    assert op.shape == (size, size)
    assert op.index == 6


@pytest.mark.slow
def test_linearization_matches_transported_residual(curves, grid, product, rng):
    u = curves.bolt_lift(grid)
    disc = SphereDiscretization(grid)
    op = curves.linearize(u, product, disc=disc)
    xi = rng.normal(size=u.values.size)
    xi /= np.linalg.norm(xi)
    eps = 1e-5
    plus = curves.transported_residual(u, eps * xi, product, disc=disc)
    minus = curves.transported_residual(u, -eps * xi, product, disc=disc)
    numeric = (plus - minus) / (2.0 * eps)
    exact = op.matrix @ xi
    assert np.linalg.norm(numeric - exact) < 1e-3 * np.linalg.norm(exact)


def test_kernel_of_a_bare_square_matrix(curves):
    report = curves.kernel_cokernel(np.diag([1.0, 2.0, 3.0, 0.0, 0.0]))
    assert (report.kernel, report.cokernel, report.index) == (2, 2, 0)
    assert report.sigma_max == pytest.approx(3.0)


def test_kernel_of_a_wide_matrix(curves, rng):
    A = rng.normal(size=(3, 5))
    report = curves.kernel_cokernel(A)
    assert (report.kernel, report.cokernel, report.index) == (2, 0, 2)
    assert report.kernel_basis.shape == (5, 2)
    np.testing.assert_allclose(A @ report.kernel_basis, 0.0, atol=1e-12)


def test_zero_matrix_is_all_kernel(curves):
    report = curves.kernel_cokernel(np.zeros((4, 4)))
    assert report.kernel == 4
    assert report.cokernel == 4


def test_kernel_without_a_gap_is_inconclusive(curves):
    with pytest.raises(InconclusiveError):
        curves.kernel_cokernel(np.diag([1.0, 2e-5, 5e-6]))


def test_select_rows_drops_the_cokernel_row(curves):
    op = CROperatorMatrix(matrix=np.diag([1.0, 1.0, 0.0]), index=0)
    np.testing.assert_array_equal(curves.select_rows(op, 1), [0, 1])


def test_mobius_fields_shape(grid):
    fields = HyperkaehlerCurves.mobius_fields(grid)
    assert fields.shape == (6 * grid.node_count, 6)
    assert np.linalg.matrix_rank(fields) == 6


def test_structure_distance_to_itself_is_zero(curves, grid, product):
    u = curves.bolt_lift(grid)
    assert curves.structure_distance(u, product, product) == 0.0


@pytest.mark.slow
def test_bolt_lift_is_regular(curves):
    (row,) = curves.regularity_scan([16])
    assert (row.kernel, row.cokernel, row.index) == (6, 0, 6)
    assert row.gap_ratio >= 10.0
    # the fibre block leaves two odd–even modes next to the Möbius kernel
    assert row.grid_modes == 2


@pytest.mark.slow
def test_continuation_at_zero_is_immediate(curves, grid, product):
    result = curves.newton_continue(curves.bolt_lift(grid), product, source=product)
    assert result.converged
    assert result.iterations == 1
    assert result.c1_distance == 0.0


@pytest.mark.slow
def test_mechanism_demo_rows(curves):
    report = curves.mechanism_demo(t_values=[0.0, 1e-3], n=16, max_iter=4)
    assert [row.t for row in report.rows] == [0.0, 1e-3]
    first = report.rows[0]
    assert first.converged
    assert first.integral == pytest.approx(0.0, abs=1e-10)


@pytest.mark.slow
def test_regularity_at_production_size_matches_the_mobius_fields(curves):
    (row,) = curves.regularity_scan([24])
    assert (row.kernel, row.cokernel) == (6, 0)
    assert row.gap_ratio > 100.0
    assert row.mobius_angle < 0.15


@pytest.mark.slow
def test_mechanism_table_integrals_vanish(curves):
    report = curves.mechanism_demo(t_values=[0.0, 1e-3, 1e-2], n=24)
    for row in report.rows:
        assert row.converged, row
        assert row.residual < 1e-8
        # the dropped rows are solved as well, up to the size of the perturbation
        assert row.full_residual <= 0.1 * row.t + 1e-6
        assert abs(row.integral) < 5e-3
        assert row.margin <= 1e-9


def test_roughness_separates_mobius_fields_from_odd_even_modes(grid):
    disc = SphereDiscretization(grid)
    fields = HyperkaehlerCurves.mobius_fields(grid)
    fields = fields / np.linalg.norm(fields, axis=0)
    assert np.max(np.abs(disc.roughness(fields))) < 1e-10

    i, j = np.meshgrid(np.arange(grid.n), np.arange(grid.n), indexing="ij")
    mode = np.zeros((2, grid.n, grid.n, 6))
    mode[0, :, :, 4] = (-1.0) ** (i + j)
    mode = mode.reshape(-1, 1) / np.linalg.norm(mode)
    assert disc.roughness(mode)[0, 0] > 100.0


@pytest.mark.slow
def test_kernel_is_stable_under_refinement(curves):
    rows = curves.regularity_scan([16, 24, 32])
    assert [row.n for row in rows] == [16, 24, 32]
    for row in rows:
        assert (row.kernel, row.cokernel, row.index) == (6, 0, 6), row
        # kernel singular values sit at roundoff, so the ratio need not grow with N
        assert row.gap_ratio > 100.0
        assert row.mobius_angle < 0.15
        assert row.vertical_fraction < 1e-4

