"""
twistorkit run configuration
A run is one command plus its metric, region, perturbation, numerics and
output tables. Files are TOML; command-line flags override file values.
"""

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.geometry import DomainShape
from models.taming import GridSpec


class Command(str, Enum):
    ANALYZE = "analyze"
    TAMING_SCAN = "taming-scan"
    NIJENHUIS = "nijenhuis"
    REZNIKOV_CHECK = "reznikov-check"
    SPHERE_REGULARITY = "sphere-regularity"
    MECHANISM_DEMO = "mechanism-demo"


class ReportFormat(str, Enum):
    JSON = "json"
    MARKDOWN = "markdown"


class MetricConfig(BaseModel):
    """
    A catalog name, 10 packed component expressions (g11, g12, …, g44),
    or one conformal factor multiplying the Euclidean metric.
    """
    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    components: Optional[List[str]] = None
    conformal: Optional[str] = None
    # None keeps the orientation a catalog chart declares; expression charts default to +1
    orientation: Optional[int] = None
    domain: DomainShape = DomainShape.BALL
    outer: float = Field(default=1.0, gt=0)
    inner: float = Field(default=0.0, ge=0)
    margin: float = Field(default=0.1, ge=0)

    @field_validator("orientation")
    @classmethod
    def _orientation(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        return value

    @field_validator("components")
    @classmethod
    def _ten_components(cls, value: Optional[List[str]]) -> Optional[List[str]]:
        if value is not None and len(value) != 10:
            raise ValueError("a metric table needs exactly 10 packed components")
        return value

    @model_validator(mode="after")
    def _one_source(self) -> "MetricConfig":
        given = [s for s in (self.name, self.components, self.conformal) if s is not None]
        if len(given) != 1:
            raise ValueError("give exactly one of name, components or conformal")
        return self


class PerturbationConfig(BaseModel):
    """Direction h (expressions or the default bolt bump) and the amplitudes t"""
    model_config = ConfigDict(extra="forbid")

    components: Optional[List[str]] = None
    t: List[float] = Field(default_factory=lambda: [0.0, 1e-3, 1e-2])

    @field_validator("components")
    @classmethod
    def _ten_components(cls, value: Optional[List[str]]) -> Optional[List[str]]:
        if value is not None and len(value) != 10:
            raise ValueError("a perturbation table needs exactly 10 packed components")
        return value


class NumericsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sphere_n: List[int] = Field(default_factory=lambda: [24])
    tolerance: float = Field(default=1e-8, gt=0)
    gap_factor: float = Field(default=1e-5, gt=0)
    max_iter: int = Field(default=8, ge=1, le=50)
    planes: int = Field(default=512, ge=64)
    seed: int = 0
    sign: int = 1
    theta: List[float] = Field(default_factory=lambda: [0.0, 0.0, 1.0])

    @field_validator("sphere_n")
    @classmethod
    def _grid_bounds(cls, value: List[int]) -> List[int]:
        if not value or any(n < 16 or n > 48 for n in value):
            raise ValueError("sphere grid sizes must lie in 16..48")
        return value

    @field_validator("sign")
    @classmethod
    def _sign(cls, value: int) -> int:
        if value not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        return value

    @field_validator("theta")
    @classmethod
    def _theta(cls, value: List[float]) -> List[float]:
        if len(value) != 3 or abs(sum(c * c for c in value) - 1.0) > 1e-12:
            raise ValueError("theta must be a unit 3-vector")
        return value


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: Optional[str] = None
    format: ReportFormat = ReportFormat.JSON


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: Command
    metric: MetricConfig = Field(default_factory=lambda: MetricConfig(name="flat"))
    region: GridSpec = Field(default_factory=GridSpec)
    perturbation: PerturbationConfig = Field(default_factory=PerturbationConfig)
    numerics: NumericsConfig = Field(default_factory=NumericsConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
