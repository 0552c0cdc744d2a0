"""
twistorkit Taming Analyzer
Decides the taming inequality |⟨Aθ,θ⟩| > |Bθ| on the unit sphere of Λ⁺,
classifies points by det(A), checks the 2/5 pinching criterion and
aggregates verdicts over sampled regions.
"""

import logging
import math
from typing import List, Tuple

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from models.geometry import CurvatureBlocks, MetricChart
from models.taming import (
    PINCHING_THRESHOLD,
    TAMING_TOLERANCE,
    GridSpec,
    PinchingVerdict,
    PointVerdict,
    RegionClass,
    RegionReport,
    TamingClass,
    TamingVerdict,
)
from services.curvature_engine import curvature_engine
from services.errors import ArgumentError, TwistorkitError
from services.workers import parallel_map

logger = logging.getLogger(__name__)

LATTICE_POINTS = 2048
POLISH_SEEDS = 6
ORACLE_POINTS = 200_000
# seeds closer than ~0.35 rad (or to each other's antipode) share a basin
SEED_SEPARATION = math.cos(0.35)
# eigenvalues of A below this fraction of the largest count as zero
KINK_ZERO = 1e-12
# |K| below this counts as zero when comparing signs
ZERO_CURVATURE = 1e-9


def fibonacci_sphere(n: int) -> np.ndarray:
    """n quasi-uniform unit vectors on S² (golden-angle spiral)."""
    if n < 1:
        raise ArgumentError("lattice size must be positive", n=n)
    idx = np.arange(n, dtype=float) + 0.5
    polar = np.arccos(1.0 - 2.0 * idx / n)
    azimuth = 2.0 * np.pi * idx / ((1.0 + 5.0 ** 0.5) / 2.0)
    return np.column_stack((
        np.cos(azimuth) * np.sin(polar),
        np.sin(azimuth) * np.sin(polar),
        np.cos(polar),
    ))


def kink_curve(A: np.ndarray, n: int) -> np.ndarray:
    """
    n unit vectors along ⟨Aθ,θ⟩ = 0, one of each antipodal pair.

    In the eigenbasis of A the curve is an ellipse in the two coordinates
    other than the one whose eigenvalue sign is unique. Definite A gives
    an empty array.
    """
    a, Q = np.linalg.eigh(0.5 * (A + A.T))
    if a[0] > 0.0 or a[2] < 0.0 or a[2] == a[0]:
        return np.zeros((0, 3))
    t = 2.0 * np.pi * (np.arange(n) + 0.5) / n
    y = np.zeros((n, 3))
    if a[1] >= 0.0:
        lone, rest = 0, (1, 2)
    else:
        lone, rest = 2, (0, 1)
    if a[lone] == 0.0:
        return np.zeros((0, 3))
    r1 = math.sqrt(a[lone] / (a[lone] - a[rest[0]]))
    r2 = math.sqrt(a[lone] / (a[lone] - a[rest[1]]))
    y[:, rest[0]] = r1 * np.cos(t)
    y[:, rest[1]] = r2 * np.sin(t)
    y[:, lone] = np.sqrt(np.maximum(1.0 - y[:, rest[0]] ** 2 - y[:, rest[1]] ** 2, 0.0))
    return y @ Q.T


def margin_values(A: np.ndarray, B: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """m(θ) = |θᵀAθ| − |Bθ| for a stack of unit vectors."""
    quad = np.einsum("ni,ij,nj->n", thetas, A, thetas)
    return np.abs(quad) - np.linalg.norm(thetas @ B.T, axis=1)


def _canonical_sign(theta: np.ndarray) -> np.ndarray:
    # m is even, so report the representative whose first non-negligible entry is positive
    for c in theta:
        if abs(c) > 1e-12:
            return theta if c > 0 else -theta
    return theta


class TamingAnalyzer:
    """
    Taming analyzer.
    Lattice search, constrained local minimization on each sign branch
    and an exact search along the kink ⟨Aθ,θ⟩ = 0 for the margin.
    """

    def __init__(self, lattice_points: int = LATTICE_POINTS, seeds: int = POLISH_SEEDS,
                 tolerance: float = TAMING_TOLERANCE):
        self.lattice = fibonacci_sphere(lattice_points)
        self.seeds = seeds
        self.tolerance = tolerance

    # ─────────────────────────────────────────────────────────
    # Margin
    # ─────────────────────────────────────────────────────────

    @staticmethod
    def _value(A: np.ndarray, B: np.ndarray, theta: np.ndarray) -> float:
        return float(abs(theta @ A @ theta) - np.linalg.norm(B @ theta))

    def _seeds(self, values: np.ndarray, mask: np.ndarray) -> List[np.ndarray]:
        """Lowest lattice points of one sign branch, pairwise apart up to sign."""
        chosen: List[np.ndarray] = []
        for idx in np.argsort(np.where(mask, values, np.inf), kind="stable"):
            if not mask[idx] or len(chosen) == self.seeds:
                break
            theta = self.lattice[idx]
            if all(abs(theta @ c) < SEED_SEPARATION for c in chosen):
                chosen.append(theta)
        return chosen

    def _branch_candidates(self, A: np.ndarray, M: np.ndarray) -> List[np.ndarray]:
        """Local minima of s⟨Aθ,θ⟩ − |Bθ| where s⟨Aθ,θ⟩ ≥ 0, for s = ±1."""
        quads = np.einsum("ni,ij,nj->n", self.lattice, A, self.lattice)
        values = np.abs(quads) - np.sqrt(np.maximum(
            np.einsum("ni,ij,nj->n", self.lattice, M, self.lattice), 0.0))
        sphere = {"type": "eq", "fun": lambda t: t @ t - 1.0, "jac": lambda t: 2.0 * t}
        found: List[np.ndarray] = []
        for s in (1.0, -1.0):
            def objective(t: np.ndarray, s: float = s) -> Tuple[float, np.ndarray]:
                Mt = M @ t
                nb = math.sqrt(max(t @ Mt, 0.0))
                grad = 2.0 * s * (A @ t) - (Mt / nb if nb > 1e-150 else 0.0)
                return s * (t @ A @ t) - nb, grad

            side = {"type": "ineq", "fun": lambda t, s=s: s * (t @ A @ t),
                    "jac": lambda t, s=s: 2.0 * s * (A @ t)}
            for theta in self._seeds(values, s * quads >= 0.0):
                result = minimize(objective, theta, jac=True, method="SLSQP",
                                  constraints=[sphere, side],
                                  options={"ftol": 1e-15, "maxiter": 200})
                found.append(result.x)
        return found

    @staticmethod
    def _onto_kink(A: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """Newton steps along the sphere onto ⟨Aθ,θ⟩ = 0."""
        theta = theta / np.linalg.norm(theta)
        for _ in range(6):
            q = theta @ A @ theta
            grad = 2.0 * (A @ theta - q * theta)
            gg = grad @ grad
            if gg < 1e-300 or abs(q) < 1e-17:
                break
            theta = theta - (q / gg) * grad
            theta /= np.linalg.norm(theta)
        return theta

    def _kink_candidates(self, A: np.ndarray, M: np.ndarray) -> List[np.ndarray]:
        """
        Maximizers of |Bθ| on the kink ⟨Aθ,θ⟩ = 0.

        For 3×3 forms the joint numerical range is convex, so
        max{θᵀMθ : θᵀAθ = 0, |θ| = 1} = min over μ of λmax(M − μA),
        a convex function of one variable. The maximizers lie in the top
        eigenspace of M − μ*A.
        """
        evals, evecs = np.linalg.eigh(A)
        zero = KINK_ZERO * max(float(np.abs(evals).max()), 1e-300)
        if evals[0] > zero or evals[-1] < -zero:
            return []
        if evals[0] >= -zero or evals[-1] <= zero:
            # semidefinite: the kink is the unit sphere of ker A
            kernel = evecs[:, np.abs(evals) <= zero]
            _, vecs = np.linalg.eigh(kernel.T @ M @ kernel)
            return [kernel @ vecs[:, -1]]

        reach = 2.0 * max(np.linalg.norm(M, 2), 1e-300) / min(evals[-1], -evals[0]) + 1.0
        best = minimize_scalar(lambda mu: np.linalg.eigvalsh(M - mu * A)[-1],
                               bounds=(-reach, reach), method="bounded",
                               options={"xatol": 1e-13 * reach})
        _, vecs = np.linalg.eigh(M - best.x * A)
        top = vecs[:, 1:]
        candidates = [top[:, -1]]
        # zeros of cᵀPc on the unit circle of the top two eigenvectors
        P = top.T @ A @ top
        mean, half, cross = 0.5 * (P[0, 0] + P[1, 1]), 0.5 * (P[0, 0] - P[1, 1]), P[0, 1]
        radius = math.hypot(half, cross)
        if radius > 0.0 and radius >= abs(mean):
            base, spread = math.atan2(cross, half), math.acos(-mean / radius)
            for phi in (0.5 * (base + spread), 0.5 * (base - spread)):
                candidates.append(top @ np.array([math.cos(phi), math.sin(phi)]))
        return [self._onto_kink(A, c) for c in candidates]

    def taming_margin(self, A: np.ndarray, B: np.ndarray) -> Tuple[float, np.ndarray]:
        """min over unit θ of |⟨Aθ,θ⟩| − |Bθ| and an attaining unit vector."""
        A = np.asarray(A, dtype=float)
        B = np.asarray(B, dtype=float)
        if A.shape != (3, 3) or B.shape != (3, 3):
            raise ArgumentError("taming margin needs 3×3 A and B")
        S = 0.5 * (A + A.T)
        M = B.T @ B
        values = margin_values(A, B, self.lattice)
        first = int(np.argmin(values))
        best_value, best_theta = float(values[first]), self.lattice[first]
        for theta in self._branch_candidates(S, M) + self._kink_candidates(S, M):
            theta = theta / np.linalg.norm(theta)
            value = self._value(A, B, theta)
            if value < best_value:
                best_value, best_theta = value, theta
        return best_value, _canonical_sign(best_theta)

    def dense_margin(self, A: np.ndarray, B: np.ndarray, n: int = ORACLE_POINTS) -> float:
        """Brute-force margin over an n-point lattice and n points along the kink, no polish."""
        A = np.asarray(A, dtype=float)
        B = np.asarray(B, dtype=float)
        thetas = np.vstack((fibonacci_sphere(n), kink_curve(A, n)))
        return float(margin_values(A, B, thetas).min())

    # ─────────────────────────────────────────────────────────
    # Classification
    # ─────────────────────────────────────────────────────────

    def classify(self, blocks: CurvatureBlocks) -> TamingVerdict:
        margin, theta = self.taming_margin(blocks.A, blocks.B)
        detA = float(np.linalg.det(blocks.A))
        degenerate = abs(margin) <= self.tolerance
        if margin > self.tolerance:
            if detA == 0.0:
                logger.warning("positive margin %.3e with singular A", margin)
            cls = TamingClass.TAMED_J_PLUS if detA > 0 else TamingClass.TAMED_J_MINUS
        else:
            cls = TamingClass.NOT_TAMED
        return TamingVerdict(margin=margin, detA=detA, taming_class=cls,
                             argmin_theta=theta.tolist(), degenerate=degenerate)

    def pinching_verdict(self, chart: MetricChart, x, n_planes: int = 512,
                         seed: int = 0) -> PinchingVerdict:
        """min|K|/max|K| when the sectional curvatures share a sign, else −∞."""
        kmin, kmax = curvature_engine.sectional_range(chart, x, n_planes=n_planes, seed=seed)
        return self.pinching_from_range(kmin, kmax)

    @staticmethod
    def pinching_from_range(kmin: float, kmax: float) -> PinchingVerdict:
        positive = kmin > ZERO_CURVATURE
        negative = kmax < -ZERO_CURVATURE
        if positive or negative:
            lo, hi = sorted((abs(kmin), abs(kmax)))
            ratio = lo / hi
        else:
            ratio = -math.inf
        return PinchingVerdict(kmin=kmin, kmax=kmax, ratio=ratio,
                               satisfies_2_5=ratio > PINCHING_THRESHOLD)

    # ─────────────────────────────────────────────────────────
    # Regions
    # ─────────────────────────────────────────────────────────

    def point_verdict(self, chart: MetricChart, x) -> PointVerdict:
        x = np.asarray(x, dtype=float)
        try:
            blocks = curvature_engine.blocks_at(chart, x)
            return PointVerdict(x=x.tolist(), verdict=self.classify(blocks), scalar=blocks.scalar)
        except TwistorkitError as exc:
            logger.debug("point %s failed: %s", x.tolist(), exc.message)
            return PointVerdict(x=x.tolist(), error=exc.to_dict())

    def region_scan(self, chart: MetricChart, grid: GridSpec) -> RegionReport:
        points = grid.points()
        logger.info("region scan of %s over %d points", chart.name, len(points))
        verdicts = parallel_map(lambda x: self.point_verdict(chart, x), points)
        classes = [v.verdict.taming_class for v in verdicts if v.verdict is not None]
        margins = [v.verdict.margin for v in verdicts if v.verdict is not None]
        errors = sum(1 for v in verdicts if v.error is not None)
        tamed = sum(1 for c in classes if c != TamingClass.NOT_TAMED)

        if classes and errors == 0 and all(c == TamingClass.TAMED_J_PLUS for c in classes):
            region = RegionClass.TAMED_J_PLUS
        elif classes and errors == 0 and all(c == TamingClass.TAMED_J_MINUS for c in classes):
            region = RegionClass.TAMED_J_MINUS
        elif tamed == 0:
            region = RegionClass.UNTAMED
        else:
            region = RegionClass.MIXED
        return RegionReport(
            chart=chart.name, points=verdicts,
            min_margin=min(margins) if margins else math.nan,
            region_class=region, tamed_points=tamed, error_points=errors,
        )


# Singleton instance
taming_analyzer = TamingAnalyzer()

taming_margin = taming_analyzer.taming_margin
classify = taming_analyzer.classify
pinching_verdict = taming_analyzer.pinching_verdict
region_scan = taming_analyzer.region_scan
