"""
twistorkit config loading
TOML run files into validated RunConfig objects, with flag overrides.
"""

import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from models.config import MetricConfig, PerturbationConfig, RunConfig
from models.geometry import ChartDomain, MetricChart
from services.errors import ConfigError
from services.expr_parser import compile_expr
from services.jet_calculus import Jet2
from services.metric_catalog import conformal_metric, metric_catalog

logger = logging.getLogger(__name__)


def _merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def read_config_file(path: str) -> Dict[str, Any]:
    try:
        with Path(path).open("rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}", path=path) from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}", path=path) from exc


def build_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """File values first, then overrides (flags), validated as one document."""
    data = read_config_file(path) if path else {}
    data = _merge(data, overrides or {})
    # a metric given on the command line replaces the file's metric table
    if overrides and "metric" in overrides and "name" in overrides["metric"]:
        data["metric"] = dict(overrides["metric"])
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as exc:
        problems = [f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}" for e in exc.errors()]
        raise ConfigError("invalid run configuration", problems=problems) from exc
    logger.debug("run config: %s", config.model_dump(mode="json"))
    return config


# ─────────────────────────────────────────────────────────────
# Metric and perturbation tables
# ─────────────────────────────────────────────────────────────

def _component_evaluator(texts: List[str]) -> Callable[[np.ndarray], List[Jet2]]:
    compiled = [compile_expr(t) for t in texts]
    return lambda x: [f(x) for f in compiled]


def resolve_metric(spec: MetricConfig) -> MetricChart:
    """A catalog chart, or an expression chart on the configured domain."""
    if spec.name is not None:
        chart = metric_catalog.catalog(spec.name)
        if spec.orientation is None or spec.orientation == chart.orientation:
            return chart
        return chart.with_orientation(spec.orientation)
    domain = ChartDomain(shape=spec.domain, outer=spec.outer, inner=spec.inner, margin=spec.margin)
    if spec.components is not None:
        evaluator = _component_evaluator(spec.components)
        name = "expression"
    else:
        factor = compile_expr(spec.conformal)

        def evaluator(x: np.ndarray) -> List[Jet2]:
            return conformal_metric(factor(x))

        name = f"conformal({spec.conformal})"
    return metric_catalog.expression_chart(name, evaluator, domain, spec.orientation or 1)


def resolve_direction(spec: PerturbationConfig) -> Optional[Callable[[np.ndarray], List[Jet2]]]:
    """Expression direction h, or None for the default bolt bump."""
    if spec.components is None:
        return None
    return _component_evaluator(spec.components)
