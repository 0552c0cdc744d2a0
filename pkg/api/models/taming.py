"""
twistorkit taming models
Pointwise verdicts of the taming inequality and their region aggregates.

The inequality at a point reads |⟨Aθ,θ⟩| > |Bθ| for every unit θ ∈ Λ⁺;
its margin is the minimum of the difference over the unit sphere.
"""

from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

# dead zone around margin 0
TAMING_TOLERANCE = 1e-9
PINCHING_THRESHOLD = 0.4


class TamingClass(str, Enum):
    """Which twistor structure the Reznikov form tames at a point"""
    TAMED_J_PLUS = "TamedJPlus"
    TAMED_J_MINUS = "TamedJMinus"
    NOT_TAMED = "NotTamed"


class RegionClass(str, Enum):
    TAMED_J_PLUS = "tamed-J+"
    TAMED_J_MINUS = "tamed-J-"
    MIXED = "mixed"
    UNTAMED = "untamed"


class TamingVerdict(BaseModel):
    """Classification of the taming inequality at one point"""
    model_config = ConfigDict(populate_by_name=True)

    margin: float
    detA: float
    taming_class: TamingClass = Field(alias="class")
    argmin_theta: List[float]
    # |margin| inside the tolerance band
    degenerate: bool = False

    @property
    def tamed(self) -> bool:
        return self.taming_class != TamingClass.NOT_TAMED


class PinchingVerdict(BaseModel):
    kmin: float
    kmax: float
    ratio: float
    satisfies_2_5: bool


class GridShape(str, Enum):
    BOX = "box"
    BALL = "ball"
    ANNULUS = "annulus"


class GridSpec(BaseModel):
    """
    A tensor grid of n points per axis on [c − r, c + r]⁴.
    Ball and annulus shapes keep only the grid points with
    inner ≤ |x − c| ≤ radius.
    """
    model_config = ConfigDict(extra="forbid")

    shape: GridShape = GridShape.BOX
    center: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0, 0.0])
    radius: float = Field(default=0.5, gt=0)
    inner: float = Field(default=0.0, ge=0)
    n: int = Field(default=3, ge=1, le=12)

    def points(self) -> np.ndarray:
        c = np.asarray(self.center, dtype=float)
        axis = np.array([0.0]) if self.n == 1 else np.linspace(-self.radius, self.radius, self.n)
        mesh = np.stack(np.meshgrid(axis, axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 4)
        if self.shape != GridShape.BOX:
            r = np.linalg.norm(mesh, axis=1)
            keep = r <= self.radius + 1e-12
            if self.shape == GridShape.ANNULUS:
                keep &= r >= self.inner - 1e-12
            mesh = mesh[keep]
        return mesh + c


class PointVerdict(BaseModel):
    """One grid point of a scan: a verdict, or the error that prevented it"""
    x: List[float]
    verdict: Optional[TamingVerdict] = None
    scalar: Optional[float] = None
    error: Optional[Dict[str, Any]] = None


class RegionReport(BaseModel):
    chart: str
    points: List[PointVerdict]
    min_margin: float
    region_class: RegionClass
    tamed_points: int
    error_points: int
