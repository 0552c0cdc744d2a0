"""
twistorkit Curvature Engine
Orthonormal frames, Levi-Civita connection, Riemann tensor and the
curvature operator in block form.

Conventions:
- coframe E = Lᵀ from the Cholesky factor g = L·Lᵀ (rows are covectors), frame F = E⁻¹
- R^ρ_σμν = ∂_μΓ^ρ_νσ − ∂_νΓ^ρ_μσ + Γ^ρ_μλΓ^λ_νσ − Γ^ρ_νλΓ^λ_μσ, so K(X,Y) = R(X,Y,X,Y)
- Λ² basis e_a∧e_b (a<b) orthonormal, ordered (01),(02),(03),(12),(13),(23)
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import cholesky
from scipy.optimize import minimize

from models.geometry import CurvatureBlocks, MetricChart, OrthoFrame
from services.errors import ArgumentError, ValidityError
from services.metric_catalog import metric_catalog

logger = logging.getLogger(__name__)

PAIRS: List[Tuple[int, int]] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]

_S = 1.0 / math.sqrt(2.0)
# rows: σ1⁺ σ2⁺ σ3⁺ σ1⁻ σ2⁻ σ3⁻ in the e_a∧e_b basis
SIGMA_BASIS = _S * np.array([
    [1, 0, 0, 0, 0, 1],
    [0, 1, 0, 0, -1, 0],
    [0, 0, 1, 1, 0, 0],
    [1, 0, 0, 0, 0, -1],
    [0, 1, 0, 0, 1, 0],
    [0, 0, 1, -1, 0, 0],
], dtype=float)

ORIENTATION_FLIP = np.diag([1.0, 1.0, -1.0])


def two_form_matrix(coeffs6: Sequence[float]) -> np.ndarray:
    """Antisymmetric 4×4 matrix of a 2-form given in the e_a∧e_b basis."""
    M = np.zeros((4, 4))
    for c, (a, b) in zip(coeffs6, PAIRS):
        M[a, b] = c
        M[b, a] = -c
    return M


# self-dual basis as antisymmetric frame matrices; ⟨M,N⟩ = ½tr(MᵀN)
SELF_DUAL = np.array([two_form_matrix(row) for row in SIGMA_BASIS[:3]])
ANTI_SELF_DUAL = np.array([two_form_matrix(row) for row in SIGMA_BASIS[3:]])


@dataclass
class PointGeometry:
    """Everything the connection and curvature give at one chart point"""
    x: np.ndarray
    orientation: int
    g: np.ndarray
    ginv: np.ndarray
    dg: np.ndarray          # [m, i, j] = ∂_m g_ij
    christoffel: np.ndarray  # [k, i, j] = Γ^k_ij
    coframe: np.ndarray     # E, rows e^a
    frame: np.ndarray       # F = E⁻¹, columns e_a
    dframe: np.ndarray      # [m] = ∂_m F
    riemann_coord: np.ndarray  # lowered R_ρσμν
    riemann_frame: np.ndarray  # R_abcd

    @property
    def connection(self) -> np.ndarray:
        """[k, a, b] = e^a(∇_∂k e_b), antisymmetric in a, b."""
        cov = self.dframe + np.einsum("ikj,jb->kib", self.christoffel, self.frame)
        return np.einsum("ai,kib->kab", self.coframe, cov)

    @property
    def connection_frame(self) -> np.ndarray:
        """[c, a, b] = e^a(∇_{e_c} e_b)."""
        return np.einsum("kc,kab->cab", self.frame, self.connection)


class CurvatureEngine:
    """
    Curvature engine.
    Turns metric jets into frames, Riemann components and curvature blocks.
    """

    def __init__(self, default_planes: int = 512):
        self.default_planes = default_planes

    # ─────────────────────────────────────────────────────────
    # Frames
    # ─────────────────────────────────────────────────────────

    def ortho_frame(self, g: np.ndarray, orientation: int = 1) -> OrthoFrame:
        g = np.asarray(g, dtype=float)
        try:
            L = cholesky(g, lower=True)
        except np.linalg.LinAlgError as exc:
            raise ValidityError("metric is not positive definite") from exc
        E = L.T.copy()
        corrected = orientation < 0
        if corrected:
            E[3] *= -1.0
        return OrthoFrame(coframe=E, frame=np.linalg.inv(E), orientation_corrected=corrected)

    def _coframe_derivative(self, E: np.ndarray, dg: np.ndarray) -> np.ndarray:
        # g = EᵀE, so E⁻ᵀ ∂g E⁻¹ = X + Xᵀ with X = ∂E·E⁻¹ upper triangular
        Einv = np.linalg.inv(E)
        dE = np.empty_like(dg)
        for m in range(4):
            S = Einv.T @ dg[m] @ Einv
            X = np.triu(S)
            X[np.diag_indices(4)] *= 0.5
            dE[m] = X @ E
        return dE

    # ─────────────────────────────────────────────────────────
    # Connection and Riemann tensor
    # ─────────────────────────────────────────────────────────

    def geometry(self, chart: MetricChart, x: Sequence[float]) -> PointGeometry:
        jets = metric_catalog.metric_jet(chart, x)
        g = np.zeros((4, 4))
        dg = np.zeros((4, 4, 4))
        ddg = np.zeros((4, 4, 4, 4))
        k = 0
        for i in range(4):
            for j in range(i, 4):
                jet = jets[k]
                g[i, j] = g[j, i] = jet.value
                dg[:, i, j] = dg[:, j, i] = jet.grad
                H = jet.hessian
                ddg[:, :, i, j] = ddg[:, :, j, i] = H
                k += 1
        ginv = np.linalg.inv(g)
        lowered = 0.5 * (np.einsum("ilj->lij", dg) + np.einsum("jli->lij", dg) - dg)
        gamma = np.einsum("kl,lij->kij", ginv, lowered)

        d_lowered = 0.5 * (
            np.einsum("milj->mlij", ddg) + np.einsum("mjli->mlij", ddg) - ddg
        )
        dginv = -np.einsum("ka,mab,bl->mkl", ginv, dg, ginv)
        dgamma = np.einsum("mkl,lij->mkij", dginv, lowered) + np.einsum("kl,mlij->mkij", ginv, d_lowered)

        r_up = (
            np.einsum("mrns->rsmn", dgamma)
            - np.einsum("nrms->rsmn", dgamma)
            + np.einsum("rml,lns->rsmn", gamma, gamma)
            - np.einsum("rnl,lms->rsmn", gamma, gamma)
        )
        r_low = np.einsum("ra,asmn->rsmn", g, r_up)

        frame = self.ortho_frame(g, chart.orientation)
        E, F = frame.coframe, frame.frame
        # the flip D = diag(1,1,1,−1) commutes with differentiation
        D = np.diag([1.0, 1.0, 1.0, -1.0]) if frame.orientation_corrected else np.eye(4)
        dE = np.einsum("ab,mbc->mac", D, self._coframe_derivative(D @ E, dg))
        dF = -np.einsum("ij,mjk,kl->mil", F, dE, F)
        r_frame = np.einsum("rsmn,ra,sb,mc,nd->abcd", r_low, F, F, F, F)
        return PointGeometry(
            x=np.asarray(x, dtype=float), orientation=chart.orientation, g=g, ginv=ginv, dg=dg,
            christoffel=gamma, coframe=E, frame=F, dframe=dF,
            riemann_coord=r_low, riemann_frame=r_frame,
        )

    def christoffel(self, chart: MetricChart, x: Sequence[float]) -> np.ndarray:
        """Γ^k_ij at x from first derivatives only."""
        jets = metric_catalog.metric_jet(chart, x)
        g = np.zeros((4, 4))
        dg = np.zeros((4, 4, 4))
        k = 0
        for i in range(4):
            for j in range(i, 4):
                g[i, j] = g[j, i] = jets[k].value
                dg[:, i, j] = dg[:, j, i] = jets[k].grad
                k += 1
        lowered = 0.5 * (np.einsum("ilj->lij", dg) + np.einsum("jli->lij", dg) - dg)
        return np.einsum("kl,lij->kij", np.linalg.inv(g), lowered)

    def riemann(self, chart: MetricChart, x: Sequence[float]) -> np.ndarray:
        """R_abcd in the orthonormal frame at x."""
        return self.geometry(chart, x).riemann_frame

    # ─────────────────────────────────────────────────────────
    # Block decomposition
    # ─────────────────────────────────────────────────────────

    def blocks(self, riemann: np.ndarray, frame: Optional[OrthoFrame] = None) -> CurvatureBlocks:
        """
        Curvature operator in the σ± basis. With a frame given, `riemann` is
        read as lowered coordinate components and moved into that frame first.
        """
        R = np.asarray(riemann, dtype=float)
        if R.shape != (4, 4, 4, 4):
            raise ArgumentError("riemann tensor must have shape (4, 4, 4, 4)")
        if frame is not None:
            F = frame.frame
            R = np.einsum("rsmn,ra,sb,mc,nd->abcd", R, F, F, F, F)
        R6 = np.array([[R[a, b, c, d] for (c, d) in PAIRS] for (a, b) in PAIRS])
        Rs = SIGMA_BASIS @ R6 @ SIGMA_BASIS.T
        ricci = np.einsum("abad->bd", R)
        return CurvatureBlocks(
            R6=Rs,
            A=Rs[:3, :3].copy(),
            B=Rs[3:, :3].copy(),
            C=Rs[3:, 3:].copy(),
            ricci=ricci,
            scalar=float(np.trace(ricci)),
        )

    def blocks_at(self, chart: MetricChart, x: Sequence[float]) -> CurvatureBlocks:
        return self.blocks(self.riemann(chart, x))

    # ─────────────────────────────────────────────────────────
    # Sectional curvature
    # ─────────────────────────────────────────────────────────

    @staticmethod
    def _sectional(R: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
        num = np.einsum("abcd,a,b,c,d->", R, u, v, u, v)
        den = (u @ u) * (v @ v) - (u @ v) ** 2
        return float(num / den)

    @staticmethod
    def _sectional_with_grad(R: np.ndarray, p: np.ndarray) -> Tuple[float, np.ndarray]:
        u, v = p[:4], p[4:]
        num = np.einsum("abcd,a,b,c,d->", R, u, v, u, v)
        dnum_u = 2.0 * np.einsum("abcd,b,c,d->a", R, v, u, v)
        dnum_v = 2.0 * np.einsum("abcd,a,c,d->b", R, u, u, v)
        uu, vv, uv = u @ u, v @ v, u @ v
        den = uu * vv - uv * uv
        dden_u = 2.0 * u * vv - 2.0 * uv * v
        dden_v = 2.0 * v * uu - 2.0 * uv * u
        K = num / den
        grad = np.concatenate([(dnum_u - K * dden_u) / den, (dnum_v - K * dden_v) / den])
        return float(K), grad

    def sectional_range(self, chart: MetricChart, x: Sequence[float],
                        n_planes: Optional[int] = None, seed: int = 0) -> Tuple[float, float]:
        """(Kmin, Kmax) over seeded random planes with a BFGS polish of both extremes."""
        n_planes = self.default_planes if n_planes is None else n_planes
        if n_planes < 64:
            raise ArgumentError("sectional_range needs at least 64 planes", n_planes=n_planes)
        R = self.riemann(chart, x)
        return self.sectional_range_of(R, n_planes, seed)

    def sectional_range_of(self, R: np.ndarray, n_planes: int = 512,
                           seed: int = 0) -> Tuple[float, float]:
        rng = np.random.default_rng(seed)
        pairs = rng.normal(size=(n_planes, 2, 4))
        values = np.empty(n_planes)
        for n, (u, v) in enumerate(pairs):
            values[n] = self._sectional(R, u, v)

        def polish(start: np.ndarray, sign: float) -> float:
            def objective(p: np.ndarray):
                K, grad = self._sectional_with_grad(R, p)
                return sign * K, sign * grad

            # keep the pair well-conditioned before the polish
            u, v = start
            u = u / np.linalg.norm(u)
            v = v - (v @ u) * u
            v = v / np.linalg.norm(v)
            res = minimize(objective, np.concatenate([u, v]), jac=True, method="BFGS",
                           options={"gtol": 1e-12, "maxiter": 200})
            return float(sign * res.fun)

        order = np.argsort(values)
        kmin = min(float(values[order[0]]), *(polish(pairs[i], 1.0) for i in order[:3]))
        kmax = max(float(values[order[-1]]), *(polish(pairs[i], -1.0) for i in order[-3:]))
        return kmin, kmax

    # ─────────────────────────────────────────────────────────
    # Einstein diagnostics
    # ─────────────────────────────────────────────────────────

    def asd_einstein_check(self, chart: MetricChart, points: np.ndarray) -> dict:
        """Largest ‖B‖ and ‖A − (R/12)·Id‖ over the points."""
        max_b = max_a = 0.0
        for x in points:
            blocks = self.blocks_at(chart, x)
            max_b = max(max_b, float(np.linalg.norm(blocks.B)))
            max_a = max(max_a, float(np.linalg.norm(blocks.A - blocks.scalar / 12.0 * np.eye(3))))
        return {"chart": chart.name, "max_B": max_b, "max_A_deviation": max_a,
                "points": int(len(points))}


# Singleton instance
curvature_engine = CurvatureEngine()

ortho_frame = curvature_engine.ortho_frame
riemann = curvature_engine.riemann
blocks = curvature_engine.blocks
sectional_range = curvature_engine.sectional_range
