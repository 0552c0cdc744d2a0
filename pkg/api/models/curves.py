"""
twistorkit curve models
Discretized spheres in Z = X × S², their Cauchy–Riemann operators and the
continuation results built from them.
"""

from enum import Enum
from typing import Any, Callable, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from models.geometry import MetricChart


class HyperkaehlerTriple(BaseModel):
    """
    Complex structures I1, I2, I3 on a chart with their Kähler forms.
    `structures(x)` returns the stacked 3×4×4 coordinate matrices,
    `forms(x)` the 3×4×4 antisymmetric form matrices ω_a(u, v) = uᵀ W_a v.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    chart: MetricChart
    structures: Callable[[np.ndarray], np.ndarray]
    forms: Callable[[np.ndarray], np.ndarray]
    holomorphic_form: Callable[[np.ndarray], np.ndarray]

    def I(self, x: np.ndarray, a: np.ndarray) -> np.ndarray:
        """I_a = a1·I1 + a2·I2 + a3·I3."""
        return np.einsum("k,kij->ij", np.asarray(a, dtype=float), self.structures(x))


class TripleCheck(BaseModel):
    chart: str
    points: int
    quaternion: float
    orthogonality: float
    closedness: float
    parallel: float


class SphereGrid(BaseModel):
    """
    Two conformal charts of the domain sphere, z and z' = 1/z, each an
    N×N grid on [−L, L]². The outer `fringe` layers of each chart carry
    overlap-interpolation rows instead of Cauchy–Riemann rows.
    """
    model_config = ConfigDict(frozen=True)

    n: int = Field(default=24, ge=16, le=48)
    half_width: float = Field(default=2.0, gt=1.0)
    fringe: int = 2

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / (self.n - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n)

    @property
    def nodes_per_chart(self) -> int:
        return self.n * self.n

    @property
    def node_count(self) -> int:
        return 2 * self.nodes_per_chart

    def node(self, chart: int, i: int, j: int) -> int:
        return chart * self.nodes_per_chart + i * self.n + j

    def is_fringe(self, i: int, j: int) -> bool:
        lo, hi = self.fringe, self.n - 1 - self.fringe
        return not (lo <= i <= hi and lo <= j <= hi)

    def z(self, i: int, j: int) -> complex:
        return complex(self.axis[i], self.axis[j])


class DiscretizedSphereMap(BaseModel):
    """Node values (chart, i, j, 6) of a map into Z in chart coordinates (x, ζ)"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: SphereGrid
    values: np.ndarray
    homotopy_class_tag: str
    fibre_point: List[float]

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)


class CRResidual(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    field: np.ndarray
    l2: float
    sup: float


class TransportMode(str, Enum):
    # first-order expansion of exp and transport (exact derivative at ξ = 0)
    EXPANSION = "expansion"
    RK4 = "rk4"


class TransportSpec(BaseModel):
    """How exp and parallel transport enter the linearization"""
    mode: TransportMode = TransportMode.EXPANSION
    steps: int = Field(default=2, ge=1)
    fd_step: float = Field(default=1e-6, gt=0)


class CROperatorMatrix(BaseModel):
    """Sparse linearized Cauchy–Riemann operator; 6 rows and 6 columns per node"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: Any
    grid: Optional[SphereGrid] = None
    index: int = 6

    @property
    def shape(self):
        return self.matrix.shape


class KernelReport(BaseModel):
    kernel: int
    cokernel: int
    index: int
    gap_ratio: float
    sigma_max: float
    threshold: float
    smallest_singular_values: List[float]
    # rough near-null singular vectors (odd–even modes of the central stencil), not counted as kernel
    grid_modes: int = 0
    kernel_basis: Optional[Any] = Field(default=None, exclude=True)


class ContinuationResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    converged: bool
    iterations: int
    residual_history: List[float]
    residual: float
    full_residual: float
    c1_distance: Optional[float] = None
    message: str = ""
    solution: Optional[DiscretizedSphereMap] = Field(default=None, exclude=True)


class MechanismRow(BaseModel):
    t: float
    integral: float
    margin: float
    iterations: int
    converged: bool
    residual: float
    full_residual: float


class MechanismReport(BaseModel):
    grid_n: int
    rows: List[MechanismRow]
    notes: List[str] = []


class RegularityRow(BaseModel):
    """Kernel and cokernel of the linearized operator at the bolt lift for one grid size"""
    n: int
    kernel: int
    cokernel: int
    index: int
    gap_ratio: float
    mobius_angle: float
    vertical_fraction: float
    grid_modes: int = 0
