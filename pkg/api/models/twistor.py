"""
twistorkit twistor models
Points and tangent frames of the local twistor space Z = chart × S².

A fibre point is a unit θ ∈ Λ⁺ written in the σ⁺ basis of the orthonormal
frame. Fibre charts are stereographic from −c onto the plane spanned by
(t1, t2), with t1 × t2 = c, so ζ = ζ1 + iζ2 is holomorphic for v ↦ θ × v.
"""

from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict


class FibreChart(BaseModel):
    """Stereographic chart of the fibre sphere centred at c"""
    model_config = ConfigDict(frozen=True)

    name: str
    center: List[float]
    t1: List[float]
    t2: List[float]

    def _basis(self):
        return np.asarray(self.t1), np.asarray(self.t2), np.asarray(self.center)

    def to_zeta(self, theta: np.ndarray) -> np.ndarray:
        t1, t2, c = self._basis()
        denom = 1.0 + float(theta @ c)
        return np.array([theta @ t1, theta @ t2]) / denom

    def from_zeta(self, zeta: np.ndarray) -> np.ndarray:
        t1, t2, c = self._basis()
        z1, z2 = float(zeta[0]), float(zeta[1])
        n2 = z1 * z1 + z2 * z2
        return (2.0 * z1 * t1 + 2.0 * z2 * t2 + (1.0 - n2) * c) / (1.0 + n2)

    def jacobian(self, zeta: np.ndarray) -> np.ndarray:
        """3×2 matrix ∂θ/∂ζ; its columns are orthogonal with length 2/(1+|ζ|²)."""
        t1, t2, c = self._basis()
        z1, z2 = float(zeta[0]), float(zeta[1])
        D = 1.0 + z1 * z1 + z2 * z2
        N = 2.0 * z1 * t1 + 2.0 * z2 * t2 + (1.0 - z1 * z1 - z2 * z2) * c
        d1 = (2.0 * t1 - 2.0 * z1 * c) / D - N * 2.0 * z1 / (D * D)
        d2 = (2.0 * t2 - 2.0 * z2 * c) / D - N * 2.0 * z2 / (D * D)
        return np.column_stack([d1, d2])


class TwistorPoint(BaseModel):
    """A base point and a unit self-dual 2-form"""
    model_config = ConfigDict(frozen=True)

    x: List[float]
    theta: List[float]
    fibre_chart: FibreChart
    zeta: List[float]

    @property
    def x_array(self) -> np.ndarray:
        return np.asarray(self.x, dtype=float)

    @property
    def theta_array(self) -> np.ndarray:
        return np.asarray(self.theta, dtype=float)

    @property
    def coordinates(self) -> np.ndarray:
        """Chart coordinates y = (x, ζ) on Z."""
        return np.concatenate([self.x_array, np.asarray(self.zeta, dtype=float)])


class TwistorTangentFrame(BaseModel):
    """
    Adapted frame of T_pZ in chart coordinates (x, ζ).
    Columns of `horizontal` lift the base orthonormal frame; `vertical`
    is an oriented orthonormal pair (f1, f2) with f1 × f2 = θ.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    horizontal: np.ndarray       # 6×4
    vertical: np.ndarray         # 6×2
    connection_form: np.ndarray  # 4×3×3, Γ⁺ along each coordinate direction

    @property
    def adapted(self) -> np.ndarray:
        return np.column_stack([self.horizontal, self.vertical])
