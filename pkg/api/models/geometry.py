"""
twistorkit geometry models
Charts, frames and the curvature operator in block form.

Coordinates on every chart are (x0, x1, x2, x3). Complex charts order them
as (Re z1, Im z1, Re z2, Im z2), so the standard complex structure sends
∂x0 ↦ ∂x1 and ∂x2 ↦ ∂x3.
"""

from enum import Enum
from typing import Callable, List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class DomainShape(str, Enum):
    """Chart domain shapes"""
    BOX = "box"
    BALL = "ball"
    ANNULUS = "annulus"


class ChartDomain(BaseModel):
    """
    An open chart domain with an interior safety margin.

    Points in the open domain can be evaluated; sampling and region scans
    stay inside the admissible set (the domain shrunk by `margin`) so that
    finite-difference stencils never leave the chart.
    """
    model_config = ConfigDict(frozen=True)

    shape: DomainShape
    outer: float = Field(gt=0)
    inner: float = Field(default=0.0, ge=0)
    margin: float = Field(default=0.1, ge=0)

    def _radius(self, x: np.ndarray) -> float:
        if self.shape == DomainShape.BOX:
            return float(np.max(np.abs(x)))
        return float(np.linalg.norm(x))

    def contains(self, x: np.ndarray) -> bool:
        r = self._radius(np.asarray(x, dtype=float))
        if self.shape == DomainShape.ANNULUS:
            return self.inner < r < self.outer
        return r < self.outer

    def admissible(self, x: np.ndarray) -> bool:
        r = self._radius(np.asarray(x, dtype=float))
        lo = self.inner + self.margin if self.shape == DomainShape.ANNULUS else 0.0
        return lo <= r <= self.outer - self.margin

    @property
    def admissible_outer(self) -> float:
        return self.outer - self.margin

    @property
    def admissible_inner(self) -> float:
        return self.inner + self.margin if self.shape == DomainShape.ANNULUS else 0.0

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n points drawn from the admissible set"""
        if self.shape == DomainShape.BOX:
            return rng.uniform(-self.admissible_outer, self.admissible_outer, size=(n, 4))
        directions = rng.normal(size=(n, 4))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        lo, hi = self.admissible_inner, self.admissible_outer
        # uniform in volume between the two radii
        radii = (lo ** 4 + rng.uniform(size=n) * (hi ** 4 - lo ** 4)) ** 0.25
        return directions * radii[:, None]


# evaluator: chart point -> 10 packed Jet2 components of g
MetricEvaluator = Callable[[np.ndarray], list]


class MetricChart(BaseModel):
    """An oriented metric chart, immutable once built"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str
    domain: ChartDomain
    evaluator: MetricEvaluator
    orientation: int = 1
    kaehler: bool = False
    hyperkaehler: bool = False
    # ω2 + iω3 = omega_sign · dz∧dw on hyperkähler charts
    omega_sign: float = 1.0
    chart_index: int = 1
    description: str = ""

    @field_validator("orientation")
    @classmethod
    def _orientation_is_sign(cls, v: int) -> int:
        if v not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        return v

    def with_orientation(self, orientation: int) -> "MetricChart":
        return self.model_copy(update={"orientation": orientation})


class OrthoFrame(BaseModel):
    """Orthonormal coframe (rows) and frame (columns) at a point"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    coframe: np.ndarray
    frame: np.ndarray
    orientation_corrected: bool = False


class CurvatureBlocks(BaseModel):
    """
    Curvature operator on Λ² = Λ⁺ ⊕ Λ⁻ at one point.

    R6 is written in the basis (σ1⁺, σ2⁺, σ3⁺, σ1⁻, σ2⁻, σ3⁻); A is the
    Λ⁺ block, C the Λ⁻ block, B maps Λ⁺ to Λ⁻. A unit round sphere has
    A = C = Identity.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    R6: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    ricci: np.ndarray
    scalar: float

    @property
    def weyl_plus(self) -> np.ndarray:
        return self.A - np.trace(self.A) / 3.0 * np.eye(3)

    @property
    def weyl_minus(self) -> np.ndarray:
        return self.C - np.trace(self.C) / 3.0 * np.eye(3)

    @property
    def tracefree_ricci(self) -> np.ndarray:
        return self.ricci - self.scalar / 4.0 * np.eye(4)

    @property
    def tracefree_ricci_norm(self) -> float:
        return float(np.linalg.norm(self.tracefree_ricci))

    @property
    def detA(self) -> float:
        return float(np.linalg.det(self.A))


class SelfCheckReport(BaseModel):
    """Hyperkähler self-check of a chart over sample points"""
    chart: str
    samples: int
    max_ricci: float
    max_A: float
    max_B: float
    tolerance: float
    accepted: bool
    failures: List[str] = []
