"""
twistorkit report emission
Bit-stable JSON (sorted keys, 17 significant digits) and markdown rendering.
"""

import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel

from models.config import ReportFormat
from models.report import Report
from services.errors import TwistorkitError

logger = logging.getLogger(__name__)

DISPLAY_DIGITS = 6


def plain(value: Any) -> Any:
    """Reports hold only dicts, lists, str, int, float, bool and None."""
    if isinstance(value, BaseModel):
        return plain(value.model_dump(by_alias=True))
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def _float_text(value: float) -> str:
    if math.isnan(value):
        return '"NaN"'
    if math.isinf(value):
        return '"Infinity"' if value > 0 else '"-Infinity"'
    return format(value, ".17g")


def _dump(value: Any, indent: int) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(k, ensure_ascii=False)}: {_dump(value[k], indent + 1)}"
                 for k in sorted(value)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, list):
        if not value:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in value):
            return "[" + ", ".join(_dump(v, indent) for v in value) + "]"
        return "[\n" + ",\n".join(pad + _dump(v, indent + 1) for v in value) + "\n" + end + "]"
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, float):
        return _float_text(value)
    if isinstance(value, int):
        return str(value)
    return json.dumps(str(value), ensure_ascii=False)


def to_json(report: Report) -> str:
    return _dump(plain(report), 0) + "\n"


# ─────────────────────────────────────────────────────────────
# Markdown
# ─────────────────────────────────────────────────────────────

def _display(value: Any) -> str:
    if isinstance(value, float):
        return format(value, f".{DISPLAY_DIGITS}g")
    if isinstance(value, list):
        return "[" + ", ".join(_display(v) for v in value) + "]"
    if value is None:
        return ""
    return str(value)


def _flatten(entry: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    for key in sorted(entry):
        value = entry[key]
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, name + "."))
        else:
            flat[name] = value
    return flat


def _table(rows: List[Dict[str, Any]]) -> List[str]:
    flat_rows = [_flatten(r) for r in rows]
    columns: List[str] = []
    for row in flat_rows:
        columns.extend(c for c in row if c not in columns)
    lines = ["| " + " | ".join(columns) + " |", "|" + "---|" * len(columns)]
    for row in flat_rows:
        lines.append("| " + " | ".join(_display(row.get(c)) for c in columns) + " |")
    return lines


def to_markdown(report: Report) -> str:
    data = plain(report)
    lines = [f"# twistorkit {data['command']}", "", f"tool version {data['tool_version']}", ""]
    if data["errors"]:
        lines += ["## Errors", ""] + _table(data["errors"]) + [""]
    if data["per_point"]:
        lines += ["## Points", ""] + _table(data["per_point"]) + [""]
    if data["summaries"]:
        lines += ["## Summaries", ""]
        for key in sorted(data["summaries"]):
            value = data["summaries"][key]
            if isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
                lines += [f"### {key}", ""] + _table(value) + [""]
            else:
                lines.append(f"- **{key}**: {_display(value)}")
        lines.append("")
    lines += ["## Conventions", ""]
    lines += [f"- {k}: {v}" for k, v in sorted(data["conventions"].items())]
    return "\n".join(lines) + "\n"


def emit_report(report: Report, fmt: ReportFormat = ReportFormat.JSON,
                path: Optional[str] = None) -> str:
    """Render the report; write it to `path` when given."""
    text = to_json(report) if fmt == ReportFormat.JSON else to_markdown(report)
    if path:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise TwistorkitError(f"cannot write report to {path}: {exc}", path=path) from exc
        logger.info("report written to %s", path)
    return text
