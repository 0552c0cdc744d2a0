"""
twistorkit twistor commands
Integrability of J± and the Reznikov form on the twistor space of a chart.
"""

from typing import Any, Dict

import numpy as np

from models.config import Command, RunConfig
from models.report import CommandResult
from routers.base import CommandRouter
from services.config import resolve_metric
from services.curvature_engine import curvature_engine
from services.errors import TwistorkitError
from services.taming_analyzer import taming_analyzer
from services.twistor_geometry import twistor_geometry
from services.workers import parallel_map

router = CommandRouter(tag="twistor")

INTEGRABLE_BOUND = 1e-4
DEGENERACY_SAMPLES = 16


def _split_errors(rows) -> list:
    return [{"x": r["x"], **r["error"]} for r in rows if "error" in r]


# ═══════════════════════════════════════════════════════════════════════════════
# NIJENHUIS TENSORS
# ═══════════════════════════════════════════════════════════════════════════════

@router.command(Command.NIJENHUIS, summary="Nijenhuis tensors of J+ and J-")
def nijenhuis(config: RunConfig) -> CommandResult:
    """
    Largest frame component of N(J+) and N(J-) at (x, θ) for every grid
    point x and the configured fibre point θ, next to |W+| at x.

    J+ is integrable exactly where W+ vanishes; J- never is.
    """
    chart = resolve_metric(config.metric)
    theta = config.numerics.theta

    def entry(x: np.ndarray) -> Dict[str, Any]:
        try:
            p = twistor_geometry.point(x, theta)
            plus = twistor_geometry.nijenhuis(chart, p, sign=1)
            minus = twistor_geometry.nijenhuis(chart, p, sign=-1)
            weyl_plus = float(np.linalg.norm(curvature_engine.blocks_at(chart, x).weyl_plus))
        except TwistorkitError as exc:
            return {"x": x.tolist(), "error": exc.to_dict()}
        return {"x": x.tolist(), "theta": list(theta), "nijenhuis_plus": plus,
                "nijenhuis_minus": minus, "weyl_plus_norm": weyl_plus}

    rows = parallel_map(entry, config.region.points())
    good = [r for r in rows if "error" not in r]
    max_plus = max((r["nijenhuis_plus"] for r in good), default=None)
    min_minus = min((r["nijenhuis_minus"] for r in good), default=None)
    return CommandResult(
        per_point=rows,
        summaries={
            "chart": chart.name,
            "max_nijenhuis_plus": max_plus,
            "min_nijenhuis_minus": min_minus,
            "j_plus_integrable": max_plus is not None and max_plus < INTEGRABLE_BOUND,
            "integrable_bound": INTEGRABLE_BOUND,
        },
        errors=_split_errors(rows),
    )


# ═══════════════════════════════════════════════════════════════════════════════
# REZNIKOV FORM
# ═══════════════════════════════════════════════════════════════════════════════

def _degeneracy_samples(W: np.ndarray, J_plus: np.ndarray, J_minus: np.ndarray,
                        rng: np.random.Generator) -> Dict[str, float]:
    """Smallest ω(U, J±U)/|U|² over seeded random tangents, and |det ω|."""
    vectors = rng.normal(size=(DEGENERACY_SAMPLES, 6))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    plus = min(float(u @ W @ (J_plus @ u)) for u in vectors)
    minus = min(float(u @ W @ (J_minus @ u)) for u in vectors)
    return {"min_omega_j_plus": plus, "min_omega_j_minus": minus,
            "abs_det_omega": abs(float(np.linalg.det(W)))}


@router.command(Command.REZNIKOV_CHECK, summary="fibre integral, closedness and taming of ω")
def reznikov_check(config: RunConfig) -> CommandResult:
    """
    For every grid point: ∫ω over the fibre sphere, the largest dω
    component at (x, θ), the curvature taming verdict and sampled values
    of ω(U, J±U). A tamed point should show positive samples for the
    structure its verdict names.
    """
    chart = resolve_metric(config.metric)
    theta = config.numerics.theta
    points = config.region.points()
    seeds = np.random.SeedSequence(config.numerics.seed).spawn(len(points))

    def entry(item) -> Dict[str, Any]:
        x, seed = item
        try:
            p = twistor_geometry.point(x, theta)
            data = twistor_geometry.fibre_data(chart, x)
            W = twistor_geometry.reznikov_matrix(chart, p, data)
            samples = _degeneracy_samples(
                W, twistor_geometry.twistor_acs(chart, p, 1, data),
                twistor_geometry.twistor_acs(chart, p, -1, data), np.random.default_rng(seed))
            row = {
                "x": x.tolist(),
                "fibre_integral": twistor_geometry.fibre_integral(chart, x),
                "d_omega": twistor_geometry.d_omega_check(chart, p),
                "verdict": taming_analyzer.classify(curvature_engine.blocks_at(chart, x)),
            }
        except TwistorkitError as exc:
            return {"x": x.tolist(), "error": exc.to_dict()}
        row.update(samples)
        return row

    rows = parallel_map(entry, list(zip(points, seeds)))
    good = [r for r in rows if "error" not in r]
    return CommandResult(
        per_point=rows,
        summaries={
            "chart": chart.name,
            "theta": list(theta),
            "max_d_omega": max((r["d_omega"] for r in good), default=None),
            "fibre_integral_range": ([min(r["fibre_integral"] for r in good),
                                      max(r["fibre_integral"] for r in good)] if good else None),
        },
        errors=_split_errors(rows),
    )
