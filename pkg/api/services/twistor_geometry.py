"""
twistorkit Twistor Geometry
The local twistor space Z = chart × S² of unit self-dual 2-forms.

Self-dual forms are antisymmetric 4×4 frame matrices M with
⟨M, N⟩ = ½tr(MᵀN); the basis M_i of Λ⁺ satisfies [M_i, M_j] = −√2 ε_ijk M_k.
The Levi-Civita connection acts on Λ⁺ through Γ⁺_ij(X) = ⟨[ω(X), M_j], M_i⟩,
so ∇_X θ = Xθ + Γ⁺(X)θ in components, and the Reznikov form is

    ω(U, V) = θ·(Uᵛ × Vᵛ) + √2·⟨Ω(X, Y), Θ⟩,   Uᵛ = δθ + Γ⁺(δx)θ,

with Ω_ab(X, Y) = R_abXY the curvature endomorphism and Θ = Σ θ_i M_i.
Tangent vectors of Z are written in chart coordinates y = (x, ζ).
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from models.geometry import MetricChart
from models.twistor import FibreChart, TwistorPoint, TwistorTangentFrame
from services.curvature_engine import SELF_DUAL, PointGeometry, curvature_engine
from services.errors import (
    ArgumentError,
    ComparisonError,
    NumericalError,
)
from services.metric_catalog import PerturbationSpec, metric_catalog

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
UNIT_TOLERANCE = 1e-12

FIBRE_NORTH = FibreChart(name="north", center=[0.0, 0.0, 1.0], t1=[1.0, 0.0, 0.0], t2=[0.0, 1.0, 0.0])
FIBRE_SOUTH = FibreChart(name="south", center=[0.0, 0.0, -1.0], t1=[0.0, 1.0, 0.0], t2=[1.0, 0.0, 0.0])


def fibre_chart_centered(center: Sequence[float], name: str = "centered") -> FibreChart:
    """Fibre chart around a unit c with t1 ⊥ c and t2 = c × t1."""
    c = np.asarray(center, dtype=float)
    c = c / np.linalg.norm(c)
    axis = np.eye(3)[int(np.argmin(np.abs(c)))]
    t1 = np.cross(c, axis)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(c, t1)
    return FibreChart(name=name, center=c.tolist(), t1=t1.tolist(), t2=t2.tolist())


def skew(v: np.ndarray) -> np.ndarray:
    """Matrix of w ↦ v × w."""
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def theta_matrix(theta: Sequence[float]) -> np.ndarray:
    return np.einsum("i,iab->ab", np.asarray(theta, dtype=float), SELF_DUAL)


def frame_acs(theta: Sequence[float]) -> np.ndarray:
    """J_θ on frame components: −√2·Θ, so σ1⁺ sends e0 ↦ e1."""
    return -SQRT2 * theta_matrix(theta)


def lambda_plus_connection(geom: PointGeometry) -> np.ndarray:
    """[k, i, j] = Γ⁺_ij(∂_k)."""
    conn = geom.connection
    comm = np.einsum("kab,jbc->kjac", conn, SELF_DUAL) - np.einsum("jab,kbc->kjac", SELF_DUAL, conn)
    return 0.5 * np.einsum("kjab,iab->kij", comm, SELF_DUAL)


@dataclass
class FibreData:
    """Connection and curvature data the twistor constructions need at a base point"""
    geom: PointGeometry
    gamma_plus: np.ndarray  # [k, i, j]

    def gamma_along(self, dx: np.ndarray) -> np.ndarray:
        return np.einsum("k,kij->ij", dx, self.gamma_plus)

    def horizontal_form(self, theta: np.ndarray) -> np.ndarray:
        """√2·⟨Ω(X, Y), Θ⟩ as a 4×4 antisymmetric matrix in chart coordinates."""
        Theta = theta_matrix(theta)
        W = SQRT2 * 0.5 * np.einsum("ab,abcd->cd", Theta, self.geom.riemann_frame)
        E = self.geom.coframe
        return E.T @ W @ E


class TwistorGeometry:
    """
    Twistor geometry service.
    Fibre points, J±, the Reznikov form and their numerical diagnostics.
    """

    def __init__(self, nijenhuis_step: float = 1e-4, domega_step: float = 1e-3,
                 comparison_step: float = 1e-5):
        self.nijenhuis_step = nijenhuis_step
        self.domega_step = domega_step
        self.comparison_step = comparison_step

    # ─────────────────────────────────────────────────────────
    # Points and base data
    # ─────────────────────────────────────────────────────────

    def point(self, x: Sequence[float], theta: Sequence[float],
              fibre_chart: Optional[FibreChart] = None) -> TwistorPoint:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (3,) or abs(np.linalg.norm(theta) - 1.0) > UNIT_TOLERANCE:
            raise ArgumentError("fibre point θ must be a unit 3-vector", theta=theta)
        if fibre_chart is None:
            fibre_chart = FIBRE_NORTH if theta[2] >= 0 else FIBRE_SOUTH
        if 1.0 + float(theta @ np.asarray(fibre_chart.center)) < 1e-6:
            raise ArgumentError("fibre point at the pole of its chart", chart=fibre_chart.name)
        return TwistorPoint(x=[float(c) for c in x], theta=theta.tolist(),
                            fibre_chart=fibre_chart, zeta=fibre_chart.to_zeta(theta).tolist())

    def point_at(self, y: Sequence[float], fibre_chart: FibreChart) -> TwistorPoint:
        """Twistor point with chart coordinates y = (x, ζ)."""
        y = np.asarray(y, dtype=float)
        theta = fibre_chart.from_zeta(y[4:])
        return TwistorPoint(x=y[:4].tolist(), theta=theta.tolist(),
                            fibre_chart=fibre_chart, zeta=y[4:].tolist())

    def fibre_data(self, chart: MetricChart, x: Sequence[float]) -> FibreData:
        geom = curvature_engine.geometry(chart, x)
        return FibreData(geom=geom, gamma_plus=lambda_plus_connection(geom))

    def fibre_to_acs(self, p: TwistorPoint, g: np.ndarray, orientation: int = 1) -> np.ndarray:
        """J_θ on T_xM in chart coordinates."""
        theta = p.theta_array
        if abs(np.linalg.norm(theta) - 1.0) > UNIT_TOLERANCE:
            raise ArgumentError("fibre point θ must be a unit vector", theta=theta)
        frame = curvature_engine.ortho_frame(g, orientation)
        return frame.frame @ frame_acs(theta) @ frame.coframe

    # ─────────────────────────────────────────────────────────
    # Splitting and almost complex structures
    # ─────────────────────────────────────────────────────────

    def _adapted(self, data: FibreData, p: TwistorPoint):
        """(Fz, Th, J_V): adapted basis (lifted e_a, ∂ζ1, ∂ζ2), fibre Jacobian, vertical J."""
        theta = p.theta_array
        zeta = np.asarray(p.zeta)
        Th = p.fibre_chart.jacobian(zeta)
        lam2 = float(Th[:, 0] @ Th[:, 0])
        Th_inv = Th.T / lam2
        F = data.geom.frame
        lift = np.empty((2, 4))
        for a in range(4):
            lift[:, a] = -Th_inv @ (data.gamma_along(F[:, a]) @ theta)
        Fz = np.zeros((6, 6))
        Fz[:4, :4] = F
        Fz[4:, :4] = lift
        Fz[4:, 4:] = np.eye(2)
        J_V = Th_inv @ skew(theta) @ Th
        return Fz, Th, J_V

    def twistor_frame(self, chart: MetricChart, p: TwistorPoint,
                      data: Optional[FibreData] = None) -> TwistorTangentFrame:
        data = data or self.fibre_data(chart, p.x)
        Fz, Th, _ = self._adapted(data, p)
        theta = p.theta_array
        lam = math.sqrt(float(Th[:, 0] @ Th[:, 0]))
        f1 = Th[:, 0] / lam
        f2 = np.cross(theta, f1)
        Th_inv = Th.T / (lam * lam)
        vertical = np.zeros((6, 2))
        vertical[4:, 0] = Th_inv @ f1
        vertical[4:, 1] = Th_inv @ f2
        return TwistorTangentFrame(horizontal=Fz[:, :4], vertical=vertical,
                                   connection_form=data.gamma_plus)

    def twistor_acs(self, chart: MetricChart, p: TwistorPoint, sign: int = 1,
                    data: Optional[FibreData] = None) -> np.ndarray:
        """J± on T_pZ in chart coordinates: ±J_θ on H, fibre rotation on V."""
        if sign not in (1, -1):
            raise ArgumentError("twistor structure sign must be +1 or -1", sign=sign)
        data = data or self.fibre_data(chart, p.x)
        Fz, _, J_V = self._adapted(data, p)
        block = np.zeros((6, 6))
        block[:4, :4] = sign * frame_acs(p.theta_array)
        block[4:, 4:] = J_V
        return Fz @ block @ np.linalg.inv(Fz)

    # ─────────────────────────────────────────────────────────
    # Reznikov form
    # ─────────────────────────────────────────────────────────

    def reznikov_ambient(self, data: FibreData, theta: np.ndarray,
                         u: Tuple[np.ndarray, np.ndarray], v: Tuple[np.ndarray, np.ndarray]) -> float:
        """ω on tangents given as (δx, δθ) with δθ ⊥ θ."""
        (ux, ut), (vx, vt) = u, v
        uv = ut + data.gamma_along(ux) @ theta
        vv = vt + data.gamma_along(vx) @ theta
        vertical = float(theta @ np.cross(uv, vv))
        return vertical + float(ux @ data.horizontal_form(theta) @ vx)

    def reznikov_matrix(self, chart: MetricChart, p: TwistorPoint,
                        data: Optional[FibreData] = None) -> np.ndarray:
        """ω as an antisymmetric 6×6 matrix in chart coordinates (x, ζ)."""
        data = data or self.fibre_data(chart, p.x)
        theta = p.theta_array
        Th = p.fibre_chart.jacobian(np.asarray(p.zeta))
        vmap = np.zeros((3, 6))
        vmap[:, :4] = np.einsum("kij,j->ik", data.gamma_plus, theta)
        vmap[:, 4:] = Th
        W = vmap.T @ (-skew(theta)) @ vmap
        W[:4, :4] += data.horizontal_form(theta)
        return W

    def reznikov_form(self, chart: MetricChart, p: TwistorPoint, u: Sequence[float],
                      v: Sequence[float]) -> float:
        return float(np.asarray(u) @ self.reznikov_matrix(chart, p) @ np.asarray(v))

    def fibre_integral(self, chart: MetricChart, x: Sequence[float], n_polar: int = 24,
                       n_azimuth: int = 48) -> float:
        """∫ω over the fibre sphere at x: Gauss–Legendre in cos, trapezoid in azimuth."""
        data = self.fibre_data(chart, x)
        nodes, weights = leggauss(n_polar)
        zero = np.zeros(4)
        total = 0.0
        for u, wu in zip(nodes, weights):
            s = math.sqrt(1.0 - u * u)
            for k in range(n_azimuth):
                phi = 2.0 * math.pi * k / n_azimuth
                theta = np.array([s * math.cos(phi), s * math.sin(phi), u])
                d_phi = np.array([-s * math.sin(phi), s * math.cos(phi), 0.0])
                d_u = np.array([-u / s * math.cos(phi), -u / s * math.sin(phi), 1.0])
                total += wu * self.reznikov_ambient(data, theta, (zero, d_phi), (zero, d_u))
        total *= 2.0 * math.pi / n_azimuth
        if not math.isfinite(total):
            raise NumericalError("fibre quadrature produced a non-finite value", x=list(x))
        return total

    # ─────────────────────────────────────────────────────────
    # Finite-difference diagnostics
    # ─────────────────────────────────────────────────────────

    @staticmethod
    def _richardson_partials(field: Callable[[np.ndarray], np.ndarray], y: np.ndarray,
                             h: float) -> np.ndarray:
        """[l] = ∂_l field, central differences at h and h/2 with one Richardson level."""
        out = []
        for l in range(len(y)):
            e = np.zeros(len(y))
            e[l] = 1.0
            d_h = (field(y + h * e) - field(y - h * e)) / (2.0 * h)
            d_h2 = (field(y + 0.5 * h * e) - field(y - 0.5 * h * e)) / h
            out.append((4.0 * d_h2 - d_h) / 3.0)
        return np.array(out)

    def d_omega_check(self, chart: MetricChart, p: TwistorPoint, h: Optional[float] = None) -> float:
        """max |dω_abc| over coordinate triples of (x, ζ)."""
        h = self.domega_step if h is None else h
        fibre = p.fibre_chart

        def field(y: np.ndarray) -> np.ndarray:
            return self.reznikov_matrix(chart, self.point_at(y, fibre))

        dW = self._richardson_partials(field, p.coordinates, h)
        worst = 0.0
        for a in range(6):
            for b in range(a + 1, 6):
                for c in range(b + 1, 6):
                    val = dW[a, b, c] + dW[b, c, a] + dW[c, a, b]
                    worst = max(worst, abs(float(val)))
        return worst

    def nijenhuis(self, chart: MetricChart, p: TwistorPoint, sign: int = 1,
                  h: Optional[float] = None) -> float:
        """Largest adapted-frame component of N_J over the 15 frame pairs."""
        h = self.nijenhuis_step if h is None else h
        fibre = p.fibre_chart

        def field(y: np.ndarray) -> np.ndarray:
            return self.twistor_acs(chart, self.point_at(y, fibre), sign)

        y0 = p.coordinates
        J = field(y0)
        dJ = self._richardson_partials(field, y0, h)
        N = (np.einsum("li,lkj->kij", J, dJ) - np.einsum("lj,lki->kij", J, dJ)
             - np.einsum("kl,ilj->kij", J, dJ) + np.einsum("kl,jli->kij", J, dJ))
        frame = self.twistor_frame(chart, p).adapted
        worst = 0.0
        for a in range(6):
            for b in range(a + 1, 6):
                vec = np.einsum("kij,i,j->k", N, frame[:, a], frame[:, b])
                worst = max(worst, float(np.max(np.abs(np.linalg.solve(frame, vec)))))
        return worst

    def holonomy_check(self, chart: MetricChart, p: TwistorPoint, u: Sequence[float],
                       v: Sequence[float], eps: float = 1e-2, steps: int = 4) -> Tuple[float, float]:
        """
        Rotation of a vertical vector transported around the parallelogram
        p ± ε/2·u ± ε/2·v, divided by ε², next to ω(u, v).
        """
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        fibre = p.fibre_chart
        y0 = p.coordinates
        corners = [y0 - 0.5 * eps * (u + v), y0 + 0.5 * eps * (u - v),
                   y0 + 0.5 * eps * (u + v), y0 - 0.5 * eps * (u - v)]
        cache: Dict[tuple, FibreData] = {}

        def gamma_at(x: np.ndarray) -> FibreData:
            key = tuple(np.round(x, 15))
            if key not in cache:
                cache[key] = self.fibre_data(chart, x)
            return cache[key]

        def rhs(y: np.ndarray, ydot: np.ndarray, w: np.ndarray) -> np.ndarray:
            theta = fibre.from_zeta(y[4:])
            theta_dot = fibre.jacobian(y[4:]) @ ydot[4:]
            G = gamma_at(y[:4]).gamma_along(ydot[:4])
            Gw = G @ w
            return -Gw + (theta @ Gw - w @ theta_dot) * theta

        start_theta = fibre.from_zeta(corners[0][4:])
        w = np.cross(start_theta, np.eye(3)[int(np.argmin(np.abs(start_theta)))])
        w /= np.linalg.norm(w)
        w0 = w.copy()
        for a in range(4):
            ya, yb = corners[a], corners[(a + 1) % 4]
            ydot = yb - ya
            dt = 1.0 / steps
            for n in range(steps):
                s = n * dt
                k1 = rhs(ya + s * ydot, ydot, w)
                k2 = rhs(ya + (s + 0.5 * dt) * ydot, ydot, w + 0.5 * dt * k1)
                k3 = rhs(ya + (s + 0.5 * dt) * ydot, ydot, w + 0.5 * dt * k2)
                k4 = rhs(ya + (s + dt) * ydot, ydot, w + dt * k3)
                w = w + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        angle = math.atan2(float(start_theta @ np.cross(w0, w)), float(w0 @ w))
        return angle / (eps * eps), self.reznikov_form(chart, p, u, v)

    # ─────────────────────────────────────────────────────────
    # Comparison between nearby metrics
    # ─────────────────────────────────────────────────────────

    def compare_theta(self, g: np.ndarray, g2: np.ndarray, orientation: int,
                      theta: np.ndarray) -> np.ndarray:
        """Λ⁺_g → Λ⁺_g' along Λ⁻_g', then normalized."""
        E = curvature_engine.ortho_frame(g, orientation).coframe
        F2 = curvature_engine.ortho_frame(g2, orientation).frame
        beta = E.T @ theta_matrix(theta) @ E
        Theta2 = F2.T @ beta @ F2
        psi = 0.5 * np.einsum("ab,iab->i", Theta2, SELF_DUAL)
        size = float(np.linalg.norm(psi))
        if size < 1e-6 * max(1.0, 0.5 * float(np.linalg.norm(Theta2))):
            raise ComparisonError("projection onto Λ⁺ of the second metric degenerates; "
                                  "metrics too far apart", size=size)
        return psi / size

    def comparison_map(self, chart: MetricChart, chart2: MetricChart,
                       p: TwistorPoint) -> Tuple[TwistorPoint, np.ndarray]:
        """(x, θ) ↦ (x, ψ(θ)/|ψ(θ)|) and its 6×6 differential in chart coordinates."""
        if chart2 is chart:
            return p, np.eye(6)
        fibre = p.fibre_chart

        def phi(y: np.ndarray) -> np.ndarray:
            x = y[:4]
            theta = fibre.from_zeta(y[4:])
            g = metric_catalog.metric_values(chart, x)
            g2 = metric_catalog.metric_values(chart2, x)
            theta2 = self.compare_theta(g, g2, chart.orientation, theta)
            return np.concatenate([x, fibre.to_zeta(theta2)])

        y0 = p.coordinates
        image = phi(y0)
        d_phi = self._richardson_partials(phi, y0, self.comparison_step).T
        return self.point_at(image, fibre), d_phi

    def pulled_back_acs(self, chart: MetricChart, chart2: MetricChart, p: TwistorPoint,
                        sign: int = 1) -> np.ndarray:
        """dΦ⁻¹ ∘ J'(Φ(p)) ∘ dΦ."""
        p2, d_phi = self.comparison_map(chart, chart2, p)
        J2 = self.twistor_acs(chart2, p2, sign)
        return np.linalg.solve(d_phi, J2 @ d_phi)

    @staticmethod
    def c1_distance(field_a: Callable[[np.ndarray], np.ndarray],
                    field_b: Callable[[np.ndarray], np.ndarray],
                    points: Sequence[np.ndarray], h: float = 1e-4) -> float:
        """Sampled C¹ distance: max entry of the difference and of its first partials."""
        worst = 0.0
        for y in points:
            y = np.asarray(y, dtype=float)
            worst = max(worst, float(np.max(np.abs(field_a(y) - field_b(y)))))
            for l in range(len(y)):
                e = np.zeros(len(y))
                e[l] = h
                diff = ((field_a(y + e) - field_b(y + e)) - (field_a(y - e) - field_b(y - e))) / (2 * h)
                worst = max(worst, float(np.max(np.abs(diff))))
        return worst

    def j_convergence_rates(self, chart: MetricChart, direction, t_values: Sequence[float],
                            points: Sequence[np.ndarray], fibre: FibreChart = FIBRE_NORTH,
                            sign: int = 1) -> dict:
        """C¹ distance of pulled-back J' to J per t, with the fitted log-log rate."""
        def field(target: MetricChart) -> Callable[[np.ndarray], np.ndarray]:
            if target is chart:
                return lambda y: self.twistor_acs(chart, self.point_at(y, fibre), sign)
            return lambda y: self.pulled_back_acs(chart, target, self.point_at(y, fibre), sign)

        base = field(chart)
        distances: List[float] = []
        for t in t_values:
            perturbed = metric_catalog.perturb(
                PerturbationSpec(base=chart, direction=direction, amplitude=t))
            distances.append(self.c1_distance(base, field(perturbed), points))
            logger.info("C1 distance at t=%g: %.3e", t, distances[-1])
        positive = [(t, d) for t, d in zip(t_values, distances) if t > 0 and d > 0]
        rate = math.nan
        if len(positive) >= 2:
            ts, ds = zip(*positive)
            rate = float(np.polyfit(np.log(ts), np.log(ds), 1)[0])
        return {"t": list(t_values), "distances": distances, "rate": rate}


# Singleton instance
twistor_geometry = TwistorGeometry()

fibre_to_acs = twistor_geometry.fibre_to_acs
twistor_frame = twistor_geometry.twistor_frame
twistor_acs = twistor_geometry.twistor_acs
reznikov_form = twistor_geometry.reznikov_form
fibre_integral = twistor_geometry.fibre_integral
d_omega_check = twistor_geometry.d_omega_check
nijenhuis = twistor_geometry.nijenhuis
comparison_map = twistor_geometry.comparison_map
