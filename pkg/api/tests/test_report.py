"""
Report serialization: stable JSON and markdown rendering.
"""

import json
import math

import numpy as np
import pytest

from models.config import ReportFormat
from models.report import Report
from models.taming import TamingClass
from services.errors import TwistorkitError
from services.report import emit_report, plain, to_json, to_markdown


@pytest.fixture
def report():
    return Report(
        command="analyze",
        config_echo={"metric": {"name": "round-s4"}, "grid": {"n": 2}},
        per_point=[
            {"x": np.array([0.0, 0.1, 0.0, 0.0]), "scalar": 12.000000000000002,
             "verdict": {"taming_class": TamingClass.TAMED_J_PLUS, "margin": 1.0}},
            {"x": [0.5, 0.0, 0.0, 0.0], "error": "outside the chart domain"},
        ],
        summaries={"points": 2, "min_margin": math.nan, "gap": math.inf},
    )


def test_json_is_deterministic(report):
    assert to_json(report) == to_json(report.model_copy(deep=True))


def test_json_keys_are_sorted(report):
    text = to_json(report)
    top = [line.split('"')[1] for line in text.splitlines() if line.startswith('  "')]
    assert top == sorted(top)


def test_floats_keep_seventeen_digits(report):
    text = to_json(report)
    assert "12.000000000000002" in text
    assert json.loads(text)["per_point"][0]["scalar"] == 12.000000000000002


def test_non_finite_floats_become_strings(report):
    data = json.loads(to_json(report))
    assert data["summaries"]["min_margin"] == "NaN"
    assert data["summaries"]["gap"] == "Infinity"


def test_plain_converts_numpy_and_enums():
    value = plain({"a": np.float64(0.5), "b": np.int64(3), "c": np.bool_(True),
                   "d": TamingClass.TAMED_J_MINUS, 4: (1, 2)})
    assert value == {"a": 0.5, "b": 3, "c": True, "d": "TamedJMinus", "4": [1, 2]}
    assert type(value["b"]) is int
    assert type(value["c"]) is bool


def test_json_round_trips_through_the_standard_parser(report):
    data = json.loads(to_json(report))
    assert data["command"] == "analyze"
    assert data["per_point"][0]["verdict"]["taming_class"] == "TamedJPlus"
    assert "taming" in data["conventions"]
    assert data["errors"] == []


def test_markdown_sections(report):
    text = to_markdown(report)
    assert text.startswith("# twistorkit analyze")
    assert "## Points" in text
    assert "## Summaries" in text
    assert "## Conventions" in text
    assert "## Errors" not in text
    assert "verdict.taming_class" in text
    assert "- **points**: 2" in text


def test_markdown_lists_errors_first():
    failed = Report(command="taming-scan", config_echo={},
                    errors=[{"kind": "domain", "message": "point outside the chart"}])
    text = to_markdown(failed)
    assert text.index("## Errors") < text.index("## Conventions")
    assert "| kind | message |" in text


def test_emit_writes_the_file(report, tmp_path):
    path = tmp_path / "report.md"
    text = emit_report(report, ReportFormat.MARKDOWN, str(path))
    assert path.read_text(encoding="utf-8") == text


def test_emit_to_a_missing_directory_fails(report, tmp_path):
    with pytest.raises(TwistorkitError):
        emit_report(report, ReportFormat.JSON, str(tmp_path / "missing" / "report.json"))
