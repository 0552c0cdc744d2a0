"""
twistorkit Hyperkähler Curves
J-holomorphic spheres in Z = X × S² over the Eguchi–Hanson bolt.

Maps are discretized on the two-chart sphere grid with 6 tangent unknowns
per node, ordered (chart, i, j, component). Interior rows carry the
Cauchy–Riemann residual ½(∂_s u + J ∂_t u); fringe rows tie a node to the
other chart through u − T(interpolant at 1/z). The linearization is
F_J(ξ) = Φ_ξ⁻¹ ∂̄_J(exp ξ) differentiated at ξ = 0: the stencil part is
exact and only the node-local block is differenced.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.linalg import qr, subspace_angles, svd
from scipy.sparse.linalg import eigsh, splu

from models.curves import (
    ContinuationResult,
    CROperatorMatrix,
    CRResidual,
    DiscretizedSphereMap,
    KernelReport,
    MechanismReport,
    MechanismRow,
    RegularityRow,
    SphereGrid,
    TransportMode,
    TransportSpec,
)
from models.taming import GridShape, GridSpec
from services.errors import ArgumentError, InconclusiveError, NumericalError
from services.hyperkaehler import FIBRE_I1, TargetStructure, hyperkaehler_service
from services.sphere_grid import STENCIL_OFFSETS, STENCIL_WEIGHTS, SphereDiscretization
from services.taming_analyzer import taming_analyzer
from services.twistor_geometry import twistor_geometry
from services.workers import parallel_map

logger = logging.getLogger(__name__)

KERNEL_GAP_FACTOR = 1e-5
# fourth-difference Gram eigenvalue above which a near-null direction counts as a grid mode
ROUGHNESS_LIMIT = 1e-2
MIN_GAP_RATIO = 10.0
SMALLEST_COMPUTED = 12
# bare matrices up to this size go through a dense SVD
DENSE_LIMIT = 600
MOBIUS_DIMENSION = 6


def index_formula(genus: int = 0, chern: int = 0) -> int:
    """Real index 2⟨c1(TZ), u⟩ + 6(1 − g) of the Cauchy–Riemann operator in complex dimension 3."""
    if genus < 0:
        raise ArgumentError("genus must be non-negative", genus=genus)
    return 2 * chern + 6 * (1 - genus)


def _block(row_node: int, col_node: int, block: np.ndarray):
    r, c = np.nonzero(block)
    return 6 * row_node + r, 6 * col_node + c, block[r, c]


def _interior_cells(grid: SphereGrid, disc: SphereDiscretization) -> List[Tuple[int, int, int]]:
    return [(c, i, j) for c in (0, 1) for i in range(grid.n) for j in range(grid.n)
            if disc.interior[i, j]]


def _all_cells(grid: SphereGrid) -> List[Tuple[int, int, int]]:
    return [(c, i, j) for c in (0, 1) for i in range(grid.n) for j in range(grid.n)]


class HyperkaehlerCurves:
    """
    Sphere-map service.
    Residuals, linearized operators, Fredholm counts and Newton continuation.
    """

    def __init__(self, gap_factor: float = KERNEL_GAP_FACTOR, min_gap_ratio: float = MIN_GAP_RATIO,
                 seed: int = 0):
        self.gap_factor = gap_factor
        self.min_gap_ratio = min_gap_ratio
        self.seed = seed

    # ─────────────────────────────────────────────────────────
    # Maps
    # ─────────────────────────────────────────────────────────

    def bolt_lift(self, grid: SphereGrid, fibre_point: Sequence[float] = (1.0, 0.0, 0.0)) -> DiscretizedSphereMap:
        """Zero section of the bolt at a fixed fibre point a, in both charts."""
        a = np.asarray(fibre_point, dtype=float)
        if a.shape != (3,) or abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise ArgumentError("fibre point must be a unit 3-vector", fibre_point=a)
        if 1.0 + float(a @ np.asarray(FIBRE_I1.center)) < 1e-6:
            raise ArgumentError("fibre point at the pole of the product fibre chart")
        S, T = np.meshgrid(grid.axis, grid.axis, indexing="ij")
        values = np.zeros((2, grid.n, grid.n, 6))
        values[..., 0] = S
        values[..., 1] = T
        values[..., 4:] = FIBRE_I1.to_zeta(a)
        return DiscretizedSphereMap(grid=grid, values=values, homotopy_class_tag="bolt-lift",
                                    fibre_point=a.tolist())

    def constant_map(self, grid: SphereGrid, y: Sequence[float], target: TargetStructure) -> DiscretizedSphereMap:
        """The map with value y (bolt chart 1 coordinates, z ≠ 0) everywhere."""
        y = np.asarray(y, dtype=float)
        values = np.zeros((2, grid.n, grid.n, 6))
        values[0] = y
        values[1] = target.transition(y)
        return DiscretizedSphereMap(grid=grid, values=values, homotopy_class_tag="constant",
                                    fibre_point=FIBRE_I1.from_zeta(y[4:]).tolist())

    def exponentiate(self, u: DiscretizedSphereMap, xi: np.ndarray, target: TargetStructure,
                     steps: int = 2) -> DiscretizedSphereMap:
        """Nodewise geodesic exponential of a tangent field."""
        V = u.values
        X = np.asarray(xi, dtype=float).reshape(V.shape)

        def move(cell):
            v = X[cell]
            if not np.any(v):
                return V[cell]
            return hyperkaehler_service.geodesic_exp(target, cell[0], V[cell], v, steps)[0]

        cells = _all_cells(u.grid)
        moved = np.zeros_like(V)
        for cell, value in zip(cells, parallel_map(move, cells)):
            moved[cell] = value
        if not np.all(np.isfinite(moved)):
            raise NumericalError("geodesic exponential produced non-finite values")
        return u.model_copy(update={"values": moved})

    # ─────────────────────────────────────────────────────────
    # Cauchy–Riemann residual
    # ─────────────────────────────────────────────────────────

    def cr_residual(self, u: DiscretizedSphereMap, target: TargetStructure,
                    disc: Optional[SphereDiscretization] = None) -> CRResidual:
        disc = disc or SphereDiscretization(u.grid)
        V = u.values
        Us, Ut = disc.derivative(V, 0), disc.derivative(V, 1)
        field = np.zeros_like(V)
        cells = _interior_cells(u.grid, disc)
        rows = parallel_map(lambda cell: 0.5 * (Us[cell] + target.acs(cell[0], V[cell]) @ Ut[cell]), cells)
        for cell, row in zip(cells, rows):
            field[cell] = row

        flat_field = field.reshape(-1, 6)
        flat_values = V.reshape(-1, 6)
        interp = disc.interpolate(flat_values)
        for f, node in enumerate(disc.fringe_nodes):
            flat_field[node] = flat_values[node] - target.transition(interp[f])
        return CRResidual(field=field, l2=float(np.sqrt(np.sum(field ** 2))) * u.grid.h,
                          sup=float(np.max(np.abs(field))))

    def transported_residual(self, u: DiscretizedSphereMap, xi: np.ndarray, target: TargetStructure,
                             steps: int = 2, disc: Optional[SphereDiscretization] = None) -> np.ndarray:
        """F_J(ξ) = Φ_ξ⁻¹ ∂̄_J(exp ξ), flattened; fringe rows stay in coordinates."""
        disc = disc or SphereDiscretization(u.grid)
        X = np.asarray(xi, dtype=float).reshape(u.values.shape)
        moved = self.exponentiate(u, xi, target, steps)
        field = self.cr_residual(moved, target, disc).field
        for cell in _interior_cells(u.grid, disc):
            v = X[cell]
            if not np.any(v):
                continue
            end, velocity = hyperkaehler_service.geodesic_exp(target, cell[0], u.values[cell], v, steps)
            field[cell] = hyperkaehler_service.transport(target, cell[0], end, -velocity, field[cell], steps)
        return field.reshape(-1)

    # ─────────────────────────────────────────────────────────
    # Linearization
    # ─────────────────────────────────────────────────────────

    def _node_block(self, target: TargetStructure, c: int, y: np.ndarray, us: np.ndarray,
                    ut: np.ndarray, r: np.ndarray, transport: TransportSpec) -> np.ndarray:
        # the centre stencil weight is zero, so ξ at the node only moves J and Φ⁻¹
        eps = transport.fd_step
        B = np.zeros((6, 6))
        if transport.mode == TransportMode.EXPANSION:
            Gamma = target.christoffel(c, y)
            for l in range(6):
                e = np.zeros(6)
                e[l] = eps
                dJ = (target.acs(c, y + e) - target.acs(c, y - e)) / (2.0 * eps)
                B[:, l] = 0.5 * dJ @ ut + Gamma[:, l, :] @ r
            return B

        def row(v: np.ndarray) -> np.ndarray:
            end, velocity = hyperkaehler_service.geodesic_exp(target, c, y, v, transport.steps)
            value = 0.5 * (us + target.acs(c, end) @ ut)
            return hyperkaehler_service.transport(target, c, end, -velocity, value, transport.steps)

        for l in range(6):
            e = np.zeros(6)
            e[l] = eps
            B[:, l] = (row(e) - row(-e)) / (2.0 * eps)
        return B

    def linearize(self, u: DiscretizedSphereMap, target: TargetStructure,
                  transport: Optional[TransportSpec] = None,
                  disc: Optional[SphereDiscretization] = None) -> CROperatorMatrix:
        """Sparse D₀F_J at u, square with 6 rows and columns per node."""
        transport = transport or TransportSpec()
        grid = u.grid
        disc = disc or SphereDiscretization(grid)
        V = u.values
        Us, Ut = disc.derivative(V, 0), disc.derivative(V, 1)
        h = grid.h
        eye = np.eye(6)

        def assemble(cell):
            c, i, j = cell
            y = V[cell]
            J = target.acs(c, y)
            r = 0.5 * (Us[cell] + J @ Ut[cell])
            n = grid.node(c, i, j)
            entries = []
            for offset, weight in zip(STENCIL_OFFSETS, STENCIL_WEIGHTS):
                coef = 0.5 * weight / h
                entries.append(_block(n, grid.node(c, i + offset, j), coef * eye))
                entries.append(_block(n, grid.node(c, i, j + offset), coef * J))
            entries.append(_block(n, n, self._node_block(target, c, y, Us[cell], Ut[cell], r, transport)))
            return entries

        parts = []
        for entries in parallel_map(assemble, _interior_cells(grid, disc)):
            parts.extend(entries)

        interp = disc.interpolate(V.reshape(-1, 6))
        for f, node in enumerate(disc.fringe_nodes):
            parts.append(_block(node, node, eye))
            T = target.transition_jacobian(interp[f])
            for m, w in zip(disc.interp_nodes[f], disc.interp_weights[f]):
                parts.append(_block(node, m, -w * T))

        rows = np.concatenate([p[0] for p in parts])
        cols = np.concatenate([p[1] for p in parts])
        vals = np.concatenate([p[2] for p in parts])
        size = 6 * grid.node_count
        matrix = sparse.csr_matrix((vals, (rows, cols)), shape=(size, size))
        logger.debug("linearized operator: %d unknowns, %d nonzeros", size, matrix.nnz)
        return CROperatorMatrix(matrix=matrix, grid=grid, index=index_formula(0))

    # ─────────────────────────────────────────────────────────
    # Kernel and cokernel
    # ─────────────────────────────────────────────────────────

    def _dense_spectrum(self, A: np.ndarray):
        rows, cols = A.shape
        _, s, Vh = svd(A, full_matrices=True)
        sigma = np.sort(np.concatenate([s, np.zeros(max(0, cols - rows))]))
        sigma_max = float(s.max()) if s.size else 0.0
        return sigma, sigma_max, lambda k: Vh[cols - k:].T

    def _sparse_spectrum(self, A, count: int):
        M = (A.T @ A).tocsc()
        top = eigsh(M, k=1, which="LA", return_eigenvectors=False)
        sigma_max = math.sqrt(max(float(top[0]), 0.0))
        mu = (1e-6 * sigma_max) ** 2
        v0 = np.random.default_rng(self.seed).standard_normal(M.shape[0])
        vals, vecs = eigsh(M, k=count, sigma=-mu, which="LM", v0=v0)
        order = np.argsort(vals)
        sigma = np.sqrt(np.clip(vals[order], 0.0, None))
        vecs = vecs[:, order]
        return sigma, sigma_max, lambda k: vecs[:, :k]

    def _resolved_spectrum(self, A, disc: SphereDiscretization, vectors: np.ndarray):
        """
        Singular values of A on the smooth part of a low right-singular subspace.
        Directions whose fourth-difference roughness exceeds ROUGHNESS_LIMIT are dropped.
        """
        rho, W = np.linalg.eigh(disc.roughness(vectors))
        smooth = vectors @ W[:, rho <= ROUGHNESS_LIMIT]
        if smooth.shape[1] == 0:
            return np.zeros(0), smooth
        _, s, Vh = svd(np.asarray(A @ smooth), full_matrices=False)
        order = np.argsort(s)
        return s[order], smooth @ Vh.T[:, order]

    def kernel_cokernel(self, op, smallest: int = SMALLEST_COMPUTED) -> KernelReport:
        """
        Kernel = singular values below σ_max·gap_factor behind a spectral gap of
        at least min_gap_ratio; cokernel from the Fredholm relation c = k − index.
        Bare matrices take index = columns − rows.

        On a sphere grid only the smooth part of the low spectrum is counted.
        Rough near-null vectors are reported as grid modes.
        """
        if not isinstance(op, CROperatorMatrix):
            matrix = op if sparse.issparse(op) else np.asarray(op, dtype=float)
            op = CROperatorMatrix(matrix=matrix, index=matrix.shape[1] - matrix.shape[0])
        A = op.matrix
        rows, cols = A.shape
        dense = not sparse.issparse(A) or min(rows, cols) <= DENSE_LIMIT
        if dense:
            sigma, sigma_max, basis = self._dense_spectrum(A.toarray() if sparse.issparse(A) else A)
        else:
            sigma, sigma_max, basis = self._sparse_spectrum(A, min(smallest, cols - 1))
        computed = sigma
        kernel_vectors = None

        grid_modes = 0
        if sigma_max == 0.0:
            k, gap, threshold = cols, math.inf, 0.0
        else:
            threshold = sigma_max * self.gap_factor
            raw = int(np.sum(computed < threshold))
            if not dense and raw >= len(computed):
                raise InconclusiveError("kernel exceeds the computed part of the spectrum",
                                        computed=len(computed))
            if op.grid is not None:
                window = min(smallest, len(computed))
                sigma, kernel_vectors = self._resolved_spectrum(
                    A, SphereDiscretization(op.grid), basis(window))
            k = int(np.sum(sigma < threshold))
            grid_modes = raw - k
            # past the resolved values the next one is at least the largest computed
            upper = float(sigma[k]) if k < len(sigma) else float(computed[-1])
            lower = float(sigma[k - 1]) if k > 0 else threshold
            gap = upper / lower if lower > 0 else math.inf
            if gap < self.min_gap_ratio:
                raise InconclusiveError("no clear spectral gap at the kernel threshold",
                                        gap_ratio=gap, smallest=sigma[:8])
        cokernel = k - op.index
        if cokernel < 0:
            raise InconclusiveError("kernel smaller than the index allows",
                                    kernel=k, index=op.index)
        logger.info("kernel %d, cokernel %d, gap ratio %.3g, grid modes %d",
                    k, cokernel, gap, grid_modes)
        return KernelReport(kernel=k, cokernel=cokernel, index=op.index, gap_ratio=gap,
                            sigma_max=sigma_max, threshold=threshold,
                            smallest_singular_values=[float(s) for s in computed[:smallest]],
                            grid_modes=grid_modes,
                            kernel_basis=basis(k) if kernel_vectors is None else kernel_vectors[:, :k])

    def cokernel_basis(self, op: CROperatorMatrix, count: int) -> np.ndarray:
        """Left singular vectors of the `count` smallest singular values."""
        A = op.matrix
        if not sparse.issparse(A) or min(A.shape) <= DENSE_LIMIT:
            dense = A.toarray() if sparse.issparse(A) else np.asarray(A)
            U, _, _ = svd(dense)
            return U[:, -count:]
        M = (A @ A.T).tocsc()
        top = eigsh(M, k=1, which="LA", return_eigenvectors=False)
        mu = (1e-6 * math.sqrt(max(float(top[0]), 0.0))) ** 2
        v0 = np.random.default_rng(self.seed + 1).standard_normal(M.shape[0])
        vals, vecs = eigsh(M, k=count, sigma=-mu, which="LM", v0=v0)
        return vecs[:, np.argsort(vals)]

    @staticmethod
    def mobius_fields(grid: SphereGrid) -> np.ndarray:
        """du(V) for V = (α + βz + γz²)∂z along the bolt lift, one column per real parameter."""
        S, T = np.meshgrid(grid.axis, grid.axis, indexing="ij")
        Z = S + 1j * T
        columns = []
        for power in range(3):
            for coef in (1.0, 1j):
                field = np.zeros((2, grid.n, grid.n, 6))
                near = coef * Z ** power
                # in z' = 1/z the same field reads −coef·z'^(2 − power) ∂z'
                far = -coef * Z ** (2 - power)
                field[0, ..., 0], field[0, ..., 1] = near.real, near.imag
                field[1, ..., 0], field[1, ..., 1] = far.real, far.imag
                columns.append(field.reshape(-1))
        return np.column_stack(columns)

    def kernel_alignment(self, report: KernelReport, grid: SphereGrid) -> Tuple[float, float]:
        """Largest principal angle to the Möbius fields and the largest fibre fraction of a kernel vector."""
        basis = report.kernel_basis
        if basis is None or basis.shape[1] == 0:
            return math.nan, math.nan
        angle = float(np.max(subspace_angles(basis, self.mobius_fields(grid))))
        per_node = basis.reshape(grid.node_count, 6, -1)
        fibre = np.linalg.norm(per_node[:, 4:, :], axis=(0, 1))
        total = np.linalg.norm(per_node, axis=(0, 1))
        return angle, float(np.max(fibre / total))

    def regularity_scan(self, sizes: Sequence[int] = (16, 24, 32), sign: int = 1) -> List[RegularityRow]:
        """Kernel/cokernel of the linearized operator at the bolt lift over grid refinements."""
        target = hyperkaehler_service.product_structure(sign)
        rows = []
        for n in sizes:
            grid = SphereGrid(n=n)
            op = self.linearize(self.bolt_lift(grid), target)
            report = self.kernel_cokernel(op)
            angle, vertical = self.kernel_alignment(report, grid)
            rows.append(RegularityRow(n=n, kernel=report.kernel, cokernel=report.cokernel,
                                      index=report.index, gap_ratio=report.gap_ratio,
                                      mobius_angle=angle, vertical_fraction=vertical,
                                      grid_modes=report.grid_modes))
        return rows

    # ─────────────────────────────────────────────────────────
    # Continuation
    # ─────────────────────────────────────────────────────────

    def select_rows(self, op: CROperatorMatrix, count: int) -> np.ndarray:
        """Row indices to keep: drop the `count` rows the cokernel weighs most, by pivoted QR."""
        Y = self.cokernel_basis(op, count)
        _, _, pivots = qr(Y.T, mode="economic", pivoting=True)
        keep = np.ones(op.shape[0], dtype=bool)
        keep[pivots[:count]] = False
        return np.flatnonzero(keep)

    def index_rows(self, u0: DiscretizedSphereMap, source: TargetStructure,
                   transport: Optional[TransportSpec] = None,
                   disc: Optional[SphereDiscretization] = None) -> np.ndarray:
        op = self.linearize(u0, source, transport, disc)
        report = self.kernel_cokernel(op)
        if (report.kernel, report.cokernel) != (MOBIUS_DIMENSION, 0):
            raise InconclusiveError("source operator is not (6, 0)",
                                    kernel=report.kernel, cokernel=report.cokernel)
        # one row per near-null left vector, grid modes included
        return self.select_rows(op, report.kernel + report.grid_modes)

    def structure_distance(self, u: DiscretizedSphereMap, source: TargetStructure,
                           target: TargetStructure, samples: int = 8) -> float:
        """Sampled C¹ distance of the two structures at the chart-0 nodes nearest z = 0."""
        grid = u.grid
        cells = sorted(((0, i, j) for i in range(grid.n) for j in range(grid.n)),
                       key=lambda cell: abs(grid.z(cell[1], cell[2])))[:samples]
        points = [u.values[cell] for cell in cells]
        return twistor_geometry.c1_distance(lambda y: source.acs(0, y), lambda y: target.acs(0, y), points)

    def newton_continue(self, u0: DiscretizedSphereMap, target: TargetStructure,
                        source: Optional[TargetStructure] = None, max_iter: int = 8,
                        tol: float = 1e-8, transport: Optional[TransportSpec] = None,
                        keep: Optional[np.ndarray] = None,
                        measure_distance: bool = True) -> ContinuationResult:
        """
        Minimum-norm Gauss–Newton on the reduced system: one row per near-null
        left singular vector of the source operator (kernel plus grid modes) is
        dropped, the rest solved exactly. Each pass counts as an iteration,
        including the final residual check.
        """
        transport = transport or TransportSpec()
        source = source or hyperkaehler_service.product_structure()
        disc = SphereDiscretization(u0.grid)
        if keep is None:
            keep = self.index_rows(u0, source, transport, disc)
        distance = self.structure_distance(u0, source, target) if measure_distance else None

        u = u0
        history: List[float] = []
        message = "iteration limit reached"
        full = math.nan
        for iteration in range(1, max_iter + 1):
            field = self.cr_residual(u, target, disc).field.reshape(-1)
            kept = field[keep]
            residual = float(np.max(np.abs(kept)))
            full = float(np.max(np.abs(field)))
            history.append(residual)
            logger.info("newton pass %d: residual %.3e", iteration, residual)
            if not math.isfinite(residual):
                message = "residual became non-finite"
                break
            if residual < tol:
                return ContinuationResult(converged=True, iterations=iteration, residual_history=history,
                                          residual=residual, full_residual=full, c1_distance=distance,
                                          message="converged", solution=u)
            if iteration >= 3 and residual > 10.0 * min(history):
                message = "residual diverging"
                break
            if iteration == max_iter:
                break
            A = self.linearize(u, target, transport, disc).matrix[keep]
            try:
                lu = splu((A @ A.T).tocsc())
            except RuntimeError as exc:
                message = f"normal equations singular: {exc}"
                break
            delta = -(A.T @ lu.solve(kept))
            u = self.exponentiate(u, delta, target, transport.steps)
        return ContinuationResult(converged=False, iterations=len(history), residual_history=history,
                                  residual=history[-1], full_residual=full, c1_distance=distance,
                                  message=message, solution=u)

    def sphere_integral(self, u: DiscretizedSphereMap, target: TargetStructure,
                        disc: Optional[SphereDiscretization] = None) -> float:
        """∫ u*ω with the chart partition of unity and trapezoid weights."""
        disc = disc or SphereDiscretization(u.grid)
        V = u.values
        Us, Ut = disc.derivative(V, 0), disc.derivative(V, 1)
        density = np.zeros(V.shape[:3])
        for cell in _interior_cells(u.grid, disc):
            if disc.weights[cell] > 0.0:
                density[cell] = Us[cell] @ target.form(cell[0], V[cell]) @ Ut[cell]
        return disc.integrate(density)

    def perturbed_margin(self, t: float, radius: float = 0.3, n: int = 3, direction=None) -> float:
        """Minimum taming margin of g + t·h over a box around the bolt point z = 0."""
        chart = hyperkaehler_service.perturbed_chart(t, direction)
        grid = GridSpec(shape=GridShape.BOX, center=[0.0, 0.0, 0.0, 0.0], radius=radius, n=n)
        return taming_analyzer.region_scan(chart, grid).min_margin

    def mechanism_demo(self, t_values: Sequence[float] = (0.0, 1e-3, 1e-2), n: int = 24,
                       max_iter: int = 8, tol: float = 1e-8, sign: int = 1,
                       direction=None) -> MechanismReport:
        """Continue the bolt lift to pulled-back structures of g + t·h and tabulate ∫ω and the margin."""
        grid = SphereGrid(n=n)
        disc = SphereDiscretization(grid)
        u0 = self.bolt_lift(grid)
        source = hyperkaehler_service.product_structure(sign)
        transport = TransportSpec()
        keep = self.index_rows(u0, source, transport, disc)

        rows = []
        for t in t_values:
            target = hyperkaehler_service.perturbed_structure(t, direction, sign=sign)
            result = self.newton_continue(u0, target, source=source, max_iter=max_iter, tol=tol,
                                          transport=transport, keep=keep, measure_distance=False)
            curve = u0 if result.solution is None else result.solution
            rows.append(MechanismRow(
                t=t, integral=self.sphere_integral(curve, target, disc),
                margin=self.perturbed_margin(t, direction=direction), iterations=result.iterations,
                converged=result.converged, residual=result.residual,
                full_residual=result.full_residual,
            ))
            logger.info("mechanism t=%g: integral %.3e, margin %.3e", t, rows[-1].integral, rows[-1].margin)
        return MechanismReport(grid_n=n, rows=rows, notes=[
            "integral of the Reznikov form of g + t·h pulled back to Z_g over the continued sphere",
            "margin is the minimum over a box of half-width 0.3 around the bolt point z = 0",
        ])


# Singleton instance
hyperkaehler_curves = HyperkaehlerCurves()

bolt_lift = hyperkaehler_curves.bolt_lift
cr_residual = hyperkaehler_curves.cr_residual
linearize = hyperkaehler_curves.linearize
kernel_cokernel = hyperkaehler_curves.kernel_cokernel
newton_continue = hyperkaehler_curves.newton_continue
mechanism_demo = hyperkaehler_curves.mechanism_demo
