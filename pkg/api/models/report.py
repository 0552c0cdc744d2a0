"""
twistorkit report model
The document every command produces, serialized as JSON or markdown.
"""

from typing import Any, Dict, List

from pydantic import BaseModel, Field

TOOL_VERSION = "0.1.0"

CONVENTIONS = {
    "curvature": "K(X,Y) = R_XYXY for orthonormal X, Y; the unit S⁴ has K = 1 and A = Id",
    "blocks": "A, B, C are 3×3 row-major in σ± bases; B ∝ trace-free Ricci (toolkit convention)",
    "fibre": "unit sphere of Λ⁺ with the round metric of radius 1 (toolkit convention)",
    "reznikov": "ω(U,V) = θ·(Uᵛ×Vᵛ) + √2⟨Ω(X,Y),Θ⟩; vertical block is +area form",
    "taming": "margin = min over unit θ of |⟨Aθ,θ⟩| − |Bθ|; dead zone 1e-9",
}


class Report(BaseModel):
    tool_version: str = TOOL_VERSION
    command: str
    config_echo: Dict[str, Any]
    per_point: List[Dict[str, Any]] = Field(default_factory=list)
    summaries: Dict[str, Any] = Field(default_factory=dict)
    conventions: Dict[str, str] = Field(default_factory=lambda: dict(CONVENTIONS))
    errors: List[Dict[str, Any]] = Field(default_factory=list)


class CommandResult(BaseModel):
    """What a command handler hands back for assembly into a Report"""
    per_point: List[Dict[str, Any]] = Field(default_factory=list)
    summaries: Dict[str, Any] = Field(default_factory=dict)
    errors: List[Dict[str, Any]] = Field(default_factory=list)
    # borderline numerics: the run completed but its verdict sits in a dead zone
    inconclusive: bool = False
