"""
twistorkit Hyperkähler
Hyperkähler triples on catalog charts, the product twistor structures of
Z = X × S² they induce, and target structures for sphere maps into the bolt.

I1 is the coordinate complex structure; ω2 + iω3 = ±dz∧dw with the sign
taken from the chart's `omega_sign`, so the triple is the same tensor in
both bolt charts. On the product, J±(x, a) = ±I_a ⊕ J_S² with J_S² v = a × v.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Sequence, Tuple

import numpy as np

from models.curves import HyperkaehlerTriple, TripleCheck
from models.geometry import MetricChart
from models.twistor import FibreChart
from services.curvature_engine import SELF_DUAL, curvature_engine
from services.errors import ArgumentError, ChartNotHyperkaehlerError
from services.metric_catalog import (
    PerturbationSpec,
    bolt_transition,
    bolt_transition_jacobian,
    default_bolt_direction,
    metric_catalog,
)
from services.twistor_geometry import fibre_chart_centered, skew, twistor_geometry

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)

I1_MATRIX = np.zeros((4, 4))
for _a in range(2):
    I1_MATRIX[2 * _a + 1, 2 * _a] = 1.0
    I1_MATRIX[2 * _a, 2 * _a + 1] = -1.0

# Re and Im of dz∧dw as coordinate form matrices
OMEGA2_BASE = np.zeros((4, 4))
OMEGA2_BASE[0, 2], OMEGA2_BASE[1, 3] = 1.0, -1.0
OMEGA2_BASE -= OMEGA2_BASE.T
OMEGA3_BASE = np.zeros((4, 4))
OMEGA3_BASE[0, 3], OMEGA3_BASE[1, 2] = 1.0, 1.0
OMEGA3_BASE -= OMEGA3_BASE.T

# product fibre coordinate: stereographic around a = (1, 0, 0), where J+ restricts to I1
FIBRE_I1 = fibre_chart_centered([1.0, 0.0, 0.0], name="i1")
CHECK_POINTS = 4
TRIPLE_TOLERANCE = 1e-9


def _partials(field_fn: Callable[[np.ndarray], np.ndarray], y: np.ndarray, h: float) -> np.ndarray:
    """[l] = ∂_l field by central differences with one Richardson level."""
    out = []
    for l in range(len(y)):
        e = np.zeros(len(y))
        e[l] = h
        d_h = (field_fn(y + e) - field_fn(y - e)) / (2.0 * h)
        d_h2 = (field_fn(y + 0.5 * e) - field_fn(y - 0.5 * e)) / h
        out.append((4.0 * d_h2 - d_h) / 3.0)
    return np.array(out)


def product_transition(y: np.ndarray) -> np.ndarray:
    """Bolt chart change on x, identity on the global fibre coordinate."""
    return np.concatenate([bolt_transition(y[:4]), y[4:]])


def product_transition_jacobian(y: np.ndarray) -> np.ndarray:
    J = np.eye(6)
    J[:4, :4] = bolt_transition_jacobian(y[:4])
    return J


def fibre_christoffel(zeta: np.ndarray) -> np.ndarray:
    """Γ of the round metric 4|dζ|²/(1+|ζ|²)²."""
    d = 1.0 + float(zeta @ zeta)
    dphi = -2.0 * np.asarray(zeta) / d
    G = np.zeros((2, 2, 2))
    delta = np.eye(2)
    for k in range(2):
        for i in range(2):
            for j in range(2):
                G[k, i, j] = delta[k, i] * dphi[j] + delta[k, j] * dphi[i] - delta[i, j] * dphi[k]
    return G


@dataclass
class TargetStructure:
    """
    An almost complex structure and a 2-form on Z over both bolt charts.
    Chart index 0 is bolt chart 1 (z, w), index 1 is bolt chart 2 (1/z, z²w).
    """
    name: str
    acs: Callable[[int, np.ndarray], np.ndarray]
    form: Callable[[int, np.ndarray], np.ndarray]
    transition: Callable[[np.ndarray], np.ndarray] = product_transition
    transition_jacobian: Callable[[np.ndarray], np.ndarray] = product_transition_jacobian
    charts: Tuple[MetricChart, MetricChart] = field(default_factory=lambda: (
        metric_catalog.bolt_chart(1), metric_catalog.bolt_chart(2)))

    def christoffel(self, chart_index: int, y: np.ndarray) -> np.ndarray:
        """Γ of the product of the base metric and the round fibre, for exp and transport."""
        G = np.zeros((6, 6, 6))
        G[:4, :4, :4] = curvature_engine.christoffel(self.charts[chart_index], y[:4])
        G[4:, 4:, 4:] = fibre_christoffel(y[4:])
        return G


class HyperkaehlerService:
    """
    Hyperkähler service.
    Triples, product structures and the target structures sphere maps are solved against.
    """

    def __init__(self, pullback_step: float = 1e-5, cache_size: int = 8192):
        self.pullback_step = pullback_step
        self.cache_size = cache_size

    # ─────────────────────────────────────────────────────────
    # Triples
    # ─────────────────────────────────────────────────────────

    def _structures(self, chart: MetricChart, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        g = metric_catalog.metric_values(chart, x)
        I2 = -np.linalg.solve(g, chart.omega_sign * OMEGA2_BASE)
        scale = math.sqrt(max(-float(np.trace(I2 @ I2)) / 4.0, 1e-300))
        I2 /= scale
        return g, np.stack([I1_MATRIX, I2, I1_MATRIX @ I2])

    def hk_triple(self, chart: MetricChart) -> HyperkaehlerTriple:
        """Triple of a hyperkähler chart, checked for quaternion relations and g-orthogonality."""
        if not chart.hyperkaehler:
            raise ChartNotHyperkaehlerError(f"metric '{chart.name}' is not hyperkähler", chart=chart.name)

        def structures(x: np.ndarray) -> np.ndarray:
            return self._structures(chart, np.asarray(x, dtype=float))[1]

        def forms(x: np.ndarray) -> np.ndarray:
            g, I = self._structures(chart, np.asarray(x, dtype=float))
            return np.einsum("kji,jl->kil", I, g)

        def holomorphic_form(x: np.ndarray) -> np.ndarray:
            W = forms(x)
            return W[1] + 1j * W[2]

        triple = HyperkaehlerTriple(chart=chart, structures=structures, forms=forms,
                                    holomorphic_form=holomorphic_form)
        samples = chart.domain.sample(np.random.default_rng(0), CHECK_POINTS)
        for x in samples:
            g, I = self._structures(chart, x)
            worst = max(self._quaternion_defect(I), self._orthogonality_defect(g, I))
            if worst > 1e-8:
                raise ChartNotHyperkaehlerError(
                    f"coordinate triple on '{chart.name}' fails the quaternion relations",
                    chart=chart.name, defect=worst, point=x)
        return triple

    @staticmethod
    def _quaternion_defect(I: np.ndarray) -> float:
        eye = np.eye(4)
        terms = [I[k] @ I[k] + eye for k in range(3)]
        terms += [I[0] @ I[1] - I[2], I[1] @ I[2] - I[0], I[2] @ I[0] - I[1]]
        return max(float(np.max(np.abs(t))) for t in terms)

    @staticmethod
    def _orthogonality_defect(g: np.ndarray, I: np.ndarray) -> float:
        return max(float(np.max(np.abs(I[k].T @ g @ I[k] - g))) for k in range(3))

    def verify_triple(self, triple: HyperkaehlerTriple, points: Sequence[np.ndarray],
                      h: float = 1e-4) -> TripleCheck:
        """Quaternion, orthogonality, dω_a = 0 and ∇I_a = 0 maxima over the points."""
        chart = triple.chart
        quat = ortho = closed = parallel = 0.0
        for x in points:
            x = np.asarray(x, dtype=float)
            g, I = self._structures(chart, x)
            quat = max(quat, self._quaternion_defect(I))
            ortho = max(ortho, self._orthogonality_defect(g, I))

            dW = _partials(triple.forms, x, h)   # [l, k, i, j]
            cyclic = (np.einsum("akbc->kabc", dW) + np.einsum("bkca->kabc", dW)
                      + np.einsum("ckab->kabc", dW))
            closed = max(closed, float(np.max(np.abs(cyclic))))

            dI = _partials(triple.structures, x, h)   # [l, k, i, j]
            Gamma = curvature_engine.christoffel(chart, x)
            nabla = (dI + np.einsum("ilm,kmj->lkij", Gamma, I)
                     - np.einsum("mlj,kim->lkij", Gamma, I))
            parallel = max(parallel, float(np.max(np.abs(nabla))))
        return TripleCheck(chart=chart.name, points=len(points), quaternion=quat,
                           orthogonality=ortho, closedness=closed, parallel=parallel)

    def theta_rotation(self, triple: HyperkaehlerTriple, x: np.ndarray) -> np.ndarray:
        """R with R[:, k] the unit θ ∈ Λ⁺ whose J_θ is I_k at x."""
        chart = triple.chart
        g, I = self._structures(chart, np.asarray(x, dtype=float))
        frame = curvature_engine.ortho_frame(g, chart.orientation)
        R = np.zeros((3, 3))
        for k in range(3):
            Theta = -(frame.coframe @ I[k] @ frame.frame) / SQRT2
            R[:, k] = 0.5 * np.einsum("ab,iab->i", Theta, SELF_DUAL)
        return R

    # ─────────────────────────────────────────────────────────
    # Product structures
    # ─────────────────────────────────────────────────────────

    @staticmethod
    def _fibre_blocks(y: np.ndarray, fibre: FibreChart) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        zeta = np.asarray(y[4:], dtype=float)
        a = fibre.from_zeta(zeta)
        Th = fibre.jacobian(zeta)
        lam = 2.0 / (1.0 + float(zeta @ zeta))
        return a, Th, Th.T / (lam * lam)

    def product_twistor_acs(self, triple: HyperkaehlerTriple, y: Sequence[float], sign: int = 1,
                            fibre: FibreChart = FIBRE_I1) -> np.ndarray:
        """J± = ±I_a ⊕ J_S² at y = (x, ζ) in chart coordinates."""
        if sign not in (1, -1):
            raise ArgumentError("twistor structure sign must be +1 or -1", sign=sign)
        y = np.asarray(y, dtype=float)
        a, Th, Th_plus = self._fibre_blocks(y, fibre)
        J = np.zeros((6, 6))
        J[:4, :4] = sign * triple.I(y[:4], a)
        J[4:, 4:] = Th_plus @ skew(a) @ Th
        return J

    def product_form(self, y: Sequence[float], fibre: FibreChart = FIBRE_I1) -> np.ndarray:
        """Reznikov form of a hyperkähler base: the fibre area form alone."""
        y = np.asarray(y, dtype=float)
        a, Th, _ = self._fibre_blocks(y, fibre)
        W = np.zeros((6, 6))
        W[4:, 4:] = Th.T @ (-skew(a)) @ Th
        return W

    def _twistor_coordinates(self, triple: HyperkaehlerTriple, y: np.ndarray,
                             fibre: FibreChart) -> Tuple[Callable[[np.ndarray], np.ndarray], FibreChart]:
        """Ψ(x, ζ_a) = (x, ζ_θ) with θ = R(x)·a, in a fibre chart rotated by R at y."""
        R0 = self.theta_rotation(triple, y[:4])
        rotated = FibreChart(name=f"{fibre.name}-rotated",
                             center=(R0 @ np.asarray(fibre.center)).tolist(),
                             t1=(R0 @ np.asarray(fibre.t1)).tolist(),
                             t2=(R0 @ np.asarray(fibre.t2)).tolist())

        def psi(yy: np.ndarray) -> np.ndarray:
            theta = self.theta_rotation(triple, yy[:4]) @ fibre.from_zeta(yy[4:])
            return np.concatenate([yy[:4], rotated.to_zeta(theta)])

        return psi, rotated

    def aligned_twistor_acs(self, triple: HyperkaehlerTriple, y: Sequence[float], sign: int = 1,
                            fibre: FibreChart = FIBRE_I1) -> np.ndarray:
        """Twistor J± of the base metric written in product coordinates (x, ζ_a)."""
        y = np.asarray(y, dtype=float)
        psi, rotated = self._twistor_coordinates(triple, y, fibre)
        d_psi = _partials(psi, y, self.pullback_step).T
        p = twistor_geometry.point_at(psi(y), rotated)
        J_tw = twistor_geometry.twistor_acs(triple.chart, p, sign)
        return np.linalg.solve(d_psi, J_tw @ d_psi)

    # ─────────────────────────────────────────────────────────
    # Target structures on the bolt
    # ─────────────────────────────────────────────────────────

    def product_structure(self, sign: int = 1) -> TargetStructure:
        triples = (self.hk_triple(metric_catalog.bolt_chart(1)),
                   self.hk_triple(metric_catalog.bolt_chart(2)))
        return TargetStructure(
            name=f"product J{'+' if sign > 0 else '-'}",
            acs=lambda c, y: self.product_twistor_acs(triples[c], y, sign),
            form=lambda c, y: self.product_form(y),
            charts=(triples[0].chart, triples[1].chart),
        )

    def perturbed_chart(self, t: float, direction=None) -> MetricChart:
        return metric_catalog.perturb(PerturbationSpec(
            base=metric_catalog.bolt_chart(1), direction=direction or default_bolt_direction(),
            amplitude=t, label="bump"))

    def perturbed_structure(self, t: float, direction=None, sign: int = 1) -> TargetStructure:
        """
        Twistor J± of g + t·h pulled back to Z_g by the comparison map, in product
        coordinates. The perturbation lives in bolt chart 1; wherever h vanishes
        to first order the product structure is used unchanged.
        """
        direction = direction or default_bolt_direction()
        product = self.product_structure(sign)
        if t == 0.0:
            return product
        base = metric_catalog.bolt_chart(1)
        chart_t = self.perturbed_chart(t, direction)
        triple = self.hk_triple(base)
        cache: Dict[bytes, Tuple[np.ndarray, np.ndarray]] = {}

        def touches(y: np.ndarray) -> bool:
            return any(j.value != 0.0 or np.any(j.grad != 0.0) for j in direction(y[:4]))

        def pulled(y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
            key = y.tobytes()
            hit = cache.get(key)
            if hit is not None:
                return hit
            psi, rotated = self._twistor_coordinates(triple, y, FIBRE_I1)
            d_psi = _partials(psi, y, self.pullback_step).T
            p = twistor_geometry.point_at(psi(y), rotated)
            p2, d_phi = twistor_geometry.comparison_map(base, chart_t, p)
            D = d_phi @ d_psi
            J = np.linalg.solve(D, twistor_geometry.twistor_acs(chart_t, p2, sign) @ D)
            W = D.T @ twistor_geometry.reznikov_matrix(chart_t, p2) @ D
            if len(cache) >= self.cache_size:
                cache.clear()
            cache[key] = (J, W)
            return J, W

        def acs(c: int, y: np.ndarray) -> np.ndarray:
            y = np.asarray(y, dtype=float)
            if c == 0 and touches(y):
                return pulled(y)[0]
            return product.acs(c, y)

        def form(c: int, y: np.ndarray) -> np.ndarray:
            y = np.asarray(y, dtype=float)
            if c == 0 and touches(y):
                return pulled(y)[1]
            return product.form(c, y)

        logger.info("perturbed target structure at t=%g on %s", t, chart_t.name)
        return TargetStructure(name=f"pulled-back J of {chart_t.name}", acs=acs, form=form,
                               charts=product.charts)

    # ─────────────────────────────────────────────────────────
    # Geodesics and transport on the product metric
    # ─────────────────────────────────────────────────────────

    @staticmethod
    def _rk4(rhs: Callable[[np.ndarray], np.ndarray], state: np.ndarray, steps: int) -> np.ndarray:
        dt = 1.0 / steps
        for _ in range(steps):
            k1 = rhs(state)
            k2 = rhs(state + 0.5 * dt * k1)
            k3 = rhs(state + 0.5 * dt * k2)
            k4 = rhs(state + dt * k3)
            state = state + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return state

    def geodesic_exp(self, target: TargetStructure, chart_index: int, y: np.ndarray,
                     v: np.ndarray, steps: int = 2) -> Tuple[np.ndarray, np.ndarray]:
        """exp_y(v) and the velocity at the endpoint, by RK4 on the geodesic equation."""
        def rhs(state: np.ndarray) -> np.ndarray:
            pos, vel = state[:6], state[6:]
            G = target.christoffel(chart_index, pos)
            return np.concatenate([vel, -np.einsum("kij,i,j->k", G, vel, vel)])

        out = self._rk4(rhs, np.concatenate([y, v]), steps)
        return out[:6], out[6:]

    def transport(self, target: TargetStructure, chart_index: int, y: np.ndarray,
                  v: np.ndarray, vector: np.ndarray, steps: int = 2) -> np.ndarray:
        """Parallel transport of `vector` along the geodesic leaving y with velocity v."""
        def rhs(state: np.ndarray) -> np.ndarray:
            pos, vel, vec = state[:6], state[6:12], state[12:]
            G = target.christoffel(chart_index, pos)
            return np.concatenate([vel, -np.einsum("kij,i,j->k", G, vel, vel),
                                   -np.einsum("kij,i,j->k", G, vel, vec)])

        out = self._rk4(rhs, np.concatenate([y, v, vector]), steps)
        return out[12:]


# Singleton instance
hyperkaehler_service = HyperkaehlerService()

hk_triple = hyperkaehler_service.hk_triple
product_twistor_acs = hyperkaehler_service.product_twistor_acs
