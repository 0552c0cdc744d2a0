"""
twistorkit analysis commands
Curvature blocks and taming verdicts over a grid of chart points.

- analyze: A, B, C, scalar curvature and the taming verdict at every point
- taming-scan: the region verdict, margins and a pinching check at the center
"""

from typing import Any, Dict

import numpy as np

from models.config import Command, RunConfig
from models.geometry import MetricChart
from models.report import CommandResult
from models.taming import GridSpec, PointVerdict
from routers.base import CommandRouter
from services.config import resolve_metric
from services.curvature_engine import curvature_engine
from services.errors import TwistorkitError
from services.taming_analyzer import taming_analyzer
from services.workers import parallel_map

router = CommandRouter(tag="analysis")


# ═══════════════════════════════════════════════════════════════════════════════
# POINTWISE CURVATURE
# ═══════════════════════════════════════════════════════════════════════════════

@router.command(Command.ANALYZE, summary="curvature blocks and taming verdict per grid point")
def analyze(config: RunConfig) -> CommandResult:
    """
    Evaluate the curvature operator at every point of the region grid.

    Each entry carries the 3×3 blocks A, B, C (row-major), the scalar
    curvature, |Ric₀| and the taming verdict {margin, detA, class}.
    Points where evaluation fails carry the error instead.
    """
    chart = resolve_metric(config.metric)
    points = config.region.points()

    def entry(x: np.ndarray) -> Dict[str, Any]:
        try:
            blocks = curvature_engine.blocks_at(chart, x)
            verdict = taming_analyzer.classify(blocks)
        except TwistorkitError as exc:
            return {"x": x.tolist(), "error": exc.to_dict()}
        return {
            "x": x.tolist(),
            "blocks": {"A": blocks.A, "B": blocks.B, "C": blocks.C},
            "scalar": blocks.scalar,
            "tracefree_ricci_norm": blocks.tracefree_ricci_norm,
            "verdict": verdict,
        }

    rows = parallel_map(entry, points)
    good = [r for r in rows if "error" not in r]
    margins = [r["verdict"].margin for r in good]
    return CommandResult(
        per_point=rows,
        summaries={
            "chart": chart.name,
            "points": len(rows),
            "error_points": len(rows) - len(good),
            "tamed_points": sum(1 for r in good if r["verdict"].tamed),
            "min_margin": min(margins) if margins else None,
        },
        errors=[{"x": r["x"], **r["error"]} for r in rows if "error" in r],
    )


# ═══════════════════════════════════════════════════════════════════════════════
# REGION VERDICT
# ═══════════════════════════════════════════════════════════════════════════════

def _serialize_point(point: PointVerdict) -> Dict[str, Any]:
    if point.error is not None:
        return {"x": point.x, "error": point.error}
    return {"x": point.x, "scalar": point.scalar, "verdict": point.verdict}


def _center_pinching(config: RunConfig, chart: MetricChart) -> Dict[str, Any]:
    region: GridSpec = config.region
    try:
        verdict = taming_analyzer.pinching_verdict(
            chart, np.asarray(region.center, dtype=float),
            n_planes=config.numerics.planes, seed=config.numerics.seed)
    except TwistorkitError as exc:
        return {"error": exc.to_dict()}
    return verdict.model_dump(by_alias=True)


@router.command(Command.TAMING_SCAN, summary="region taming verdict")
def taming_scan(config: RunConfig) -> CommandResult:
    """
    Classify the whole region: tamed-J+, tamed-J-, mixed or untamed.

    The run is inconclusive when any point's margin falls in the dead
    zone, since the region class then hinges on roundoff.
    """
    chart = resolve_metric(config.metric)
    report = taming_analyzer.region_scan(chart, config.region)
    degenerate = [p.x for p in report.points if p.verdict is not None and p.verdict.degenerate]
    return CommandResult(
        per_point=[_serialize_point(p) for p in report.points],
        summaries={
            "chart": report.chart,
            "region_class": report.region_class,
            "min_margin": report.min_margin,
            "tamed_points": report.tamed_points,
            "error_points": report.error_points,
            "degenerate_points": len(degenerate),
            "pinching_at_center": _center_pinching(config, chart),
        },
        errors=[{"x": p.x, **p.error} for p in report.points if p.error is not None],
        inconclusive=bool(degenerate),
    )
