"""
twistorkit Metric Catalog
Closed-form charts, expression-defined metrics and perturbation families.

Every chart evaluates to the 10 packed Jet2 components of g in
numpy.triu_indices(4) order. Kähler charts are written through a Hermitian
matrix H_ab̄ = ∂_a∂_b̄K of the potential; the real metric is Re(uᵀ H v̄).
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from models.geometry import ChartDomain, DomainShape, MetricChart, SelfCheckReport
from services.errors import (
    ArgumentError,
    CatalogLookupError,
    DomainError,
    EvaluationError,
    ValidityError,
)
from services.jet_calculus import (
    PACKED,
    Jet2,
    jet_exp,
    jet_point,
    jet_sqrt,
    unpack_symmetric,
)

logger = logging.getLogger(__name__)

# Asymptotic scale of both Eguchi–Hanson charts
EH_SCALE = 1.0


# ─────────────────────────────────────────────────────────────
# Complex jets: pairs of real jets
# ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ComplexJet:
    re: Jet2
    im: Jet2

    @classmethod
    def real(cls, a) -> "ComplexJet":
        return cls(a if isinstance(a, Jet2) else Jet2(a), Jet2(0.0))

    def conj(self) -> "ComplexJet":
        return ComplexJet(self.re, -self.im)

    def abs2(self) -> Jet2:
        return self.re * self.re + self.im * self.im

    def __add__(self, other: "ComplexJet") -> "ComplexJet":
        return ComplexJet(self.re + other.re, self.im + other.im)

    def __mul__(self, other) -> "ComplexJet":
        if isinstance(other, ComplexJet):
            return ComplexJet(self.re * other.re - self.im * other.im,
                              self.re * other.im + self.im * other.re)
        return ComplexJet(self.re * other, self.im * other)

    __rmul__ = __mul__


def hermitian_to_real(h00: Jet2, h01: ComplexJet, h11: Jet2) -> List[Jet2]:
    """Packed real metric of a 2×2 Hermitian form (h00, h11 real, h10 = conj h01)."""
    zero = Jet2(0.0)
    neg_im = -h01.im
    # (0,0) (0,1) (0,2) (0,3) (1,1) (1,2) (1,3) (2,2) (2,3) (3,3)
    return [h00, zero, h01.re, h01.im, h00.copy(), neg_im, h01.re.copy(),
            h11, zero.copy(), h11.copy()]


def conformal_metric(factor: Jet2) -> List[Jet2]:
    zero = Jet2(0.0)
    out = []
    for i in range(4):
        for j in range(i, 4):
            out.append(factor.copy() if i == j else zero.copy())
    return out


# ─────────────────────────────────────────────────────────────
# Closed-form evaluators
# ─────────────────────────────────────────────────────────────

def _flat(x: np.ndarray) -> List[Jet2]:
    return conformal_metric(Jet2(1.0))


def _sq_norm(jets: Sequence[Jet2]) -> Jet2:
    total = Jet2(0.0)
    for j in jets:
        total = total + j * j
    return total


def _round_s4(x: np.ndarray) -> List[Jet2]:
    r2 = _sq_norm(jet_point(x))
    return conformal_metric((2.0 / (1.0 + r2)) ** 2)


def _hyperbolic_h4(x: np.ndarray) -> List[Jet2]:
    r2 = _sq_norm(jet_point(x))
    return conformal_metric((2.0 / (1.0 - r2)) ** 2)


def _u2_invariant(profile: Callable[[Jet2], tuple]) -> Callable[[np.ndarray], List[Jet2]]:
    """Kähler metric of a potential F(|z1|²+|z2|²), profile(u) = (F', F'')."""

    def evaluate(x: np.ndarray) -> List[Jet2]:
        x0, x1, x2, x3 = jet_point(x)
        z1, z2 = ComplexJet(x0, x1), ComplexJet(x2, x3)
        n1, n2 = z1.abs2(), z2.abs2()
        fp, fpp = profile(n1 + n2)
        return hermitian_to_real(fp + fpp * n1, z1.conj() * z2 * fpp, fp + fpp * n2)

    return evaluate


def _fubini_study_profile(u: Jet2) -> tuple:
    fp = 1.0 / (1.0 + u)
    return fp, -(fp * fp)


def _complex_hyperbolic_profile(u: Jet2) -> tuple:
    fp = 1.0 / (1.0 - u)
    return fp, fp * fp


def _calabi_profile(u: Jet2, a: float = EH_SCALE) -> tuple:
    s = jet_sqrt(u * u + a ** 4)
    return s / u, -(a ** 4) / (s * u * u)


def _s2xs2(x: np.ndarray) -> List[Jet2]:
    x0, x1, x2, x3 = jet_point(x)
    h00 = 4.0 / (1.0 + x0 * x0 + x1 * x1) ** 2
    h11 = 4.0 / (1.0 + x2 * x2 + x3 * x3) ** 2
    return hermitian_to_real(h00, ComplexJet.real(0.0), h11)


def _bolt(x: np.ndarray, a: float = EH_SCALE) -> List[Jet2]:
    """
    Degree −2 bundle chart (z, w) with K = G(v) + a²·log(1+|z|²),
    v = |w|²(1+|z|²)² and G'(v) = 1/(2(a²+s)), s = sqrt(v+a⁴).
    The same formula holds in the second chart (1/z, z²w).
    """
    x0, x1, x2, x3 = jet_point(x)
    z, w = ComplexJet(x0, x1), ComplexJet(x2, x3)
    zz, ww = z.abs2(), w.abs2()
    P = 1.0 + zz
    v = ww * P * P
    s = jet_sqrt(v + a ** 4)
    a2s = a * a + s
    gp = 1.0 / (2.0 * a2s)
    gpp = -1.0 / (4.0 * s * a2s * a2s)

    vz = z.conj() * (2.0 * ww * P)
    vw = w.conj() * (P * P)
    h00 = gp * (2.0 * ww * (P + zz)) + gpp * vz.abs2() + (a * a) / (P * P)
    h01 = (w * z.conj()) * (2.0 * P * gp) + (vz * vw.conj()) * gpp
    h11 = gp * (P * P) + gpp * vw.abs2()
    return hermitian_to_real(h00, h01, h11)


def bolt_transition(x: Sequence[float]) -> np.ndarray:
    """Chart-1 to chart-2 coordinates of the bolt: (z, w) ↦ (1/z, z²w). Self-inverse in form."""
    x = np.asarray(x, dtype=float)
    z = complex(x[0], x[1])
    w = complex(x[2], x[3])
    if z == 0:
        raise DomainError("bolt transition undefined at z = 0", point=x)
    z2 = 1.0 / z
    w2 = z * z * w
    return np.array([z2.real, z2.imag, w2.real, w2.imag])


def bolt_transition_jacobian(x: Sequence[float]) -> np.ndarray:
    """Real 4×4 Jacobian of bolt_transition at x."""
    x = np.asarray(x, dtype=float)
    z = complex(x[0], x[1])
    w = complex(x[2], x[3])
    # holomorphic: dz' = −dz/z², dw' = 2zw dz + z² dw
    blocks = [[-1.0 / (z * z), 0.0], [2.0 * z * w, z * z]]
    J = np.zeros((4, 4))
    for a in range(2):
        for b in range(2):
            c = complex(blocks[a][b])
            J[2 * a:2 * a + 2, 2 * b:2 * b + 2] = [[c.real, -c.imag], [c.imag, c.real]]
    return J


# ─────────────────────────────────────────────────────────────
# Perturbations
# ─────────────────────────────────────────────────────────────

class PerturbationSpec(BaseModel):
    """g + t·h with h a symmetric 2-tensor evaluator (10 packed jets)"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    base: MetricChart
    direction: Callable[[np.ndarray], list]
    amplitude: float = 0.0
    label: str = "h"


def bump_jet(x: np.ndarray, center: Sequence[float], radius: float) -> Jet2:
    """Smooth compactly supported bump exp(1 − 1/(1 − ρ²)), ρ = |x − c|/radius."""
    c = np.asarray(center, dtype=float)
    if float(np.sum((np.asarray(x) - c) ** 2)) >= radius * radius:
        return Jet2(0.0)
    jets = jet_point(x)
    rho2 = Jet2(0.0)
    for i in range(4):
        d = (jets[i] - c[i]) * (1.0 / radius)
        rho2 = rho2 + d * d
    return jet_exp(1.0 - 1.0 / (1.0 - rho2))


def bump_direction(center: Sequence[float], radius: float,
                   tensor: Optional[np.ndarray] = None) -> Callable[[np.ndarray], List[Jet2]]:
    """Direction h = bump(x)·T for a constant symmetric tensor T (identity by default)."""
    if radius <= 0:
        raise ArgumentError("bump radius must be positive", radius=radius)
    T = np.eye(4) if tensor is None else np.asarray(tensor, dtype=float)
    if T.shape != (4, 4) or not np.allclose(T, T.T):
        raise ArgumentError("bump tensor must be a symmetric 4×4 matrix")
    packed = [T[i, j] for i in range(4) for j in range(i, 4)]

    def evaluate(x: np.ndarray) -> List[Jet2]:
        b = bump_jet(x, center, radius)
        return [b * c for c in packed]

    return evaluate


def default_bolt_direction() -> Callable[[np.ndarray], List[Jet2]]:
    """Bump on the fibre away from the zero section, support inside |z| < 0.4 of chart 1."""
    T = np.diag([1.0, 1.0, 0.5, 0.5])
    T[0, 2] = T[2, 0] = 0.25
    return bump_direction(center=(0.0, 0.0, 0.15, 0.0), radius=0.38, tensor=T)


# ─────────────────────────────────────────────────────────────
# Catalog
# ─────────────────────────────────────────────────────────────

_CATALOG: Dict[str, dict] = {
    "flat": dict(
        evaluator=_flat, domain=ChartDomain(shape=DomainShape.BOX, outer=2.0, margin=0.1),
        kaehler=True, hyperkaehler=True,
        description="Euclidean metric on a box",
    ),
    "round-s4": dict(
        evaluator=_round_s4, domain=ChartDomain(shape=DomainShape.BALL, outer=3.0, margin=0.1),
        description="stereographic chart of the unit 4-sphere",
    ),
    "hyperbolic-h4": dict(
        evaluator=_hyperbolic_h4, domain=ChartDomain(shape=DomainShape.BALL, outer=1.0, margin=0.1),
        description="Poincaré ball model of hyperbolic 4-space",
    ),
    "fubini-study-cp2": dict(
        evaluator=_u2_invariant(_fubini_study_profile),
        domain=ChartDomain(shape=DomainShape.BALL, outer=3.0, margin=0.1),
        kaehler=True, description="affine chart of CP², potential log(1+|z|²)",
    ),
    "complex-hyperbolic-ch2": dict(
        evaluator=_u2_invariant(_complex_hyperbolic_profile),
        domain=ChartDomain(shape=DomainShape.BALL, outer=1.0, margin=0.1),
        orientation=-1, kaehler=True,
        description="Bergman ball, potential −log(1−|z|²), non-complex orientation",
    ),
    "s2xs2": dict(
        evaluator=_s2xs2, domain=ChartDomain(shape=DomainShape.BALL, outer=3.0, margin=0.1),
        kaehler=True, description="product of two unit round 2-spheres",
    ),
    "eguchi-hanson": dict(
        evaluator=_u2_invariant(_calabi_profile),
        domain=ChartDomain(shape=DomainShape.ANNULUS, inner=1.0, outer=4.2, margin=0.2),
        kaehler=True, hyperkaehler=True,
        description="double cover of Eguchi–Hanson on C²∖{0}, Calabi potential, a = 1",
    ),
    "eguchi-hanson-bolt": dict(
        evaluator=_bolt, domain=ChartDomain(shape=DomainShape.BOX, outer=3.2, margin=0.2),
        kaehler=True, hyperkaehler=True, omega_sign=1.0,
        description="degree −2 bundle over CP¹, chart (z, w) covering the zero section",
    ),
}


class MetricCatalog:
    """
    Metric chart catalog.
    Looks up closed-form charts, evaluates metric jets and builds perturbations.
    """

    def __init__(self):
        self.entries = _CATALOG

    @property
    def names(self) -> List[str]:
        return list(self.entries)

    def catalog(self, name: str) -> MetricChart:
        entry = self.entries.get(name)
        if entry is None:
            raise CatalogLookupError(f"unknown metric '{name}'", name=name, known=self.names)
        return MetricChart(name=name, **entry)

    def bolt_chart(self, index: int) -> MetricChart:
        """Chart 1 (z, w) or chart 2 (1/z, z²w) of the bolt; Ω = ±dz∧dw respectively."""
        if index not in (1, 2):
            raise ArgumentError("bolt chart index must be 1 or 2", index=index)
        chart = self.catalog("eguchi-hanson-bolt")
        if index == 1:
            return chart
        return chart.model_copy(update={"chart_index": 2, "omega_sign": -1.0,
                                        "name": "eguchi-hanson-bolt#2"})

    def metric_jet(self, chart: MetricChart, x: Sequence[float]) -> List[Jet2]:
        """The 10 packed jets of g at x, checked for domain and positivity."""
        x = np.asarray(x, dtype=float)
        if x.shape != (4,):
            raise ArgumentError("chart points have 4 coordinates", shape=list(x.shape))
        if not chart.domain.contains(x):
            raise DomainError(f"point outside the domain of '{chart.name}'", point=x)
        try:
            jets = chart.evaluator(x)
        except EvaluationError as exc:
            raise DomainError(f"metric '{chart.name}' not evaluable: {exc.message}", point=x) from exc
        if len(jets) != PACKED:
            raise ArgumentError("metric evaluator must return 10 packed components")
        g = unpack_symmetric(np.array([j.value for j in jets]))
        if not np.all(np.isfinite(g)):
            raise ValidityError(f"non-finite metric on '{chart.name}'", point=x.tolist())
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError as exc:
            raise ValidityError(f"metric '{chart.name}' is not positive definite at {x.tolist()}",
                                point=x.tolist()) from exc
        return jets

    def metric_values(self, chart: MetricChart, x: Sequence[float]) -> np.ndarray:
        return unpack_symmetric(np.array([j.value for j in self.metric_jet(chart, x)]))

    def perturb(self, spec: PerturbationSpec) -> MetricChart:
        """Chart evaluating g + t·h; t = 0 returns the base evaluator itself."""
        if spec.amplitude == 0.0:
            return spec.base
        t = float(spec.amplitude)
        base, direction = spec.base.evaluator, spec.direction

        def evaluate(x: np.ndarray) -> List[Jet2]:
            return [g + h * t for g, h in zip(base(x), direction(x))]

        # a perturbed metric is no longer known to be Kähler or hyperkähler
        return spec.base.model_copy(update={
            "evaluator": evaluate,
            "name": f"{spec.base.name}+{t:g}*{spec.label}",
            "kaehler": False,
            "hyperkaehler": False,
        })

    def validity_bound(self, spec: PerturbationSpec, points: np.ndarray) -> float:
        """Largest |t| keeping g + t·h positive definite at every point given."""
        bound = math.inf
        for x in points:
            g = unpack_symmetric(np.array([j.value for j in spec.base.evaluator(x)]))
            h = unpack_symmetric(np.array([j.value for j in spec.direction(x)]))
            L = np.linalg.cholesky(g)
            Li = np.linalg.inv(L)
            eig = np.linalg.eigvalsh(Li @ h @ Li.T)
            extreme = float(np.max(np.abs(eig)))
            if extreme > 0:
                bound = min(bound, 1.0 / extreme)
        return bound

    def expression_chart(self, name: str, components: Callable[[np.ndarray], List[Jet2]],
                         domain: ChartDomain, orientation: int = 1) -> MetricChart:
        return MetricChart(name=name, evaluator=components, domain=domain,
                           orientation=orientation, description="expression-defined metric")

    def eh_selfcheck(self, chart: MetricChart, samples: Optional[np.ndarray] = None,
                     count: int = 32, seed: int = 0, tolerance: float = 1e-6) -> SelfCheckReport:
        """max |Ric|, ‖A‖, ‖B‖ over samples; accepted when all stay below tolerance."""
        from services.curvature_engine import curvature_engine

        if samples is None:
            samples = chart.domain.sample(np.random.default_rng(seed), count)
        max_ric = max_a = max_b = 0.0
        failures: List[str] = []
        for x in samples:
            blocks = curvature_engine.blocks_at(chart, x)
            max_ric = max(max_ric, float(np.max(np.abs(blocks.ricci))))
            max_a = max(max_a, float(np.linalg.norm(blocks.A)))
            max_b = max(max_b, float(np.linalg.norm(blocks.B)))
        for label, value in (("ricci", max_ric), ("A", max_a), ("B", max_b)):
            if value >= tolerance:
                failures.append(f"max {label} = {value:.3e} exceeds {tolerance:g}")
        report = SelfCheckReport(
            chart=chart.name, samples=len(samples), max_ricci=max_ric, max_A=max_a, max_B=max_b,
            tolerance=tolerance, accepted=not failures, failures=failures,
        )
        logger.info("selfcheck %s: ricci=%.2e A=%.2e B=%.2e", chart.name, max_ric, max_a, max_b)
        return report


# Singleton instance
metric_catalog = MetricCatalog()

catalog = metric_catalog.catalog
metric_jet = metric_catalog.metric_jet
perturb = metric_catalog.perturb
eh_selfcheck = metric_catalog.eh_selfcheck
