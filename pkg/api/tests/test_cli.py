"""
End-to-end command runs through main(): reports on stdout and exit codes.
"""

import json

import numpy as np
import pytest

from main import ROUTES, build_parser, main, overrides_from, run
from models.config import Command
from routers import CommandRouter, collect_routes
from services.config import build_config

S4_CONFORMAL = "4/(1 + x1^2 + x2^2 + x3^2 + x4^2)^2"


def _run(capsys, argv):
    code = main(argv)
    return code, capsys.readouterr().out


def test_every_command_has_a_route():
    assert set(ROUTES) == set(Command)


def test_overrides_follow_the_toml_tables():
    args = build_parser().parse_args(
        ["mechanism-demo", "--t", "0", "0.01", "--N", "16", "--sign", "-1"])
    assert overrides_from(args) == {
        "command": "mechanism-demo",
        "perturbation": {"t": [0.0, 0.01]},
        "numerics": {"sphere_n": [16], "sign": -1},
    }


def test_analyze_round_sphere(capsys):
    code, out = _run(capsys, ["analyze", "--metric", "round-s4", "--grid", "2"])
    assert code == 0
    data = json.loads(out)
    assert data["command"] == "analyze"
    assert data["summaries"]["points"] == 16
    assert data["summaries"]["tamed_points"] == 16
    first = data["per_point"][0]
    np.testing.assert_allclose(first["blocks"]["A"], np.eye(3), atol=1e-9)
    assert first["verdict"]["class"] == "TamedJPlus"


def test_analyze_keeps_catalog_orientation(capsys):
    code, out = _run(capsys, ["analyze", "--metric", "complex-hyperbolic-ch2", "--grid", "1"])
    assert code == 0
    data = json.loads(out)
    verdict = data["per_point"][0]["verdict"]
    assert verdict["class"] == "TamedJMinus"
    assert verdict["detA"] < 0
    assert data["config_echo"]["metric"]["orientation"] is None


def test_run_file_orientation_overrides_the_catalog(capsys, tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('[metric]\nname = "complex-hyperbolic-ch2"\norientation = 1\n'
                    "[region]\nn = 1\n", encoding="utf-8")
    code, out = _run(capsys, ["analyze", "--config", str(path)])
    assert code == 0
    assert json.loads(out)["per_point"][0]["verdict"]["class"] == "NotTamed"


def test_unknown_metric_is_a_validation_error(capsys):
    code, out = _run(capsys, ["analyze", "--metric", "nosuch", "--grid", "1"])
    assert code == 2
    data = json.loads(out)
    assert data["errors"][0]["kind"] == "lookup"


def test_flat_scan_is_inconclusive(capsys):
    code, out = _run(capsys, ["taming-scan", "--metric", "flat", "--grid", "2"])
    assert code == 3
    data = json.loads(out)
    assert data["summaries"]["region_class"] == "untamed"
    assert data["summaries"]["degenerate_points"] == 16


def test_round_sphere_scan_is_tamed(capsys):
    code, out = _run(capsys, ["taming-scan", "--metric", "round-s4", "--grid", "2"])
    assert code == 0
    summaries = json.loads(out)["summaries"]
    assert summaries["region_class"] == "tamed-J+"
    assert summaries["pinching_at_center"]["satisfies_2_5"] is True


def test_expression_metric_from_a_run_file(capsys, tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(
        f'[metric]\nconformal = "{S4_CONFORMAL}"\n\n[region]\nradius = 0.2\nn = 2\n',
        encoding="utf-8",
    )
    code, out = _run(capsys, ["analyze", "--config", str(path)])
    assert code == 0
    data = json.loads(out)
    assert data["summaries"]["tamed_points"] == 16
    assert data["summaries"]["min_margin"] == pytest.approx(1.0, abs=1e-6)


def test_unknown_config_key_exits_with_validation_error(capsys, tmp_path):
    path = tmp_path / "run.toml"
    path.write_text("[region]\nradious = 0.2\n", encoding="utf-8")
    code, out = _run(capsys, ["analyze", "--config", str(path)])
    assert code == 2
    assert json.loads(out)["errors"][0]["kind"] == "config"


def test_missing_config_file(capsys, tmp_path):
    code, _ = _run(capsys, ["analyze", "--config", str(tmp_path / "absent.toml")])
    assert code == 2


def test_bad_expression_reports_the_offset(capsys, tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('[metric]\nconformal = "1 + "\n\n[region]\nn = 1\n', encoding="utf-8")
    code, out = _run(capsys, ["analyze", "--config", str(path)])
    assert code == 2
    error = json.loads(out)["errors"][0]
    assert error["kind"] == "syntax"
    assert error["details"]["offset"] == 4


def test_sign_flag_is_restricted():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["nijenhuis", "--sign", "2"])


def test_markdown_report_to_a_file(capsys, tmp_path):
    path = tmp_path / "report.md"
    code, out = _run(capsys, ["analyze", "--metric", "flat", "--grid", "1",
                              "--format", "markdown", "--output", str(path)])
    assert code == 0
    assert out == ""
    assert path.read_text(encoding="utf-8").startswith("# twistorkit analyze")


@pytest.mark.slow
def test_sphere_regularity_command(capsys):
    code, out = _run(capsys, ["sphere-regularity", "--N", "16"])
    assert code == 0
    data = json.loads(out)
    assert data["per_point"][0]["kernel"] == 6
    assert data["summaries"]["index_formula"]["genus_0"] == 6


def test_repeated_runs_are_byte_identical(capsys):
    argv = ["taming-scan", "--metric", "fubini-study-cp2", "--grid", "2", "--seed", "5"]
    _, first = _run(capsys, argv)
    _, second = _run(capsys, argv)
    assert first == second


def test_router_rejects_a_second_handler_for_a_command():
    router = CommandRouter(tag="dup")

    @router.command(Command.ANALYZE)
    def first(config):
        """First handler."""

    assert router.routes[Command.ANALYZE].summary == "First handler."
    with pytest.raises(ValueError):
        router.command(Command.ANALYZE)(first)


def test_collect_routes_rejects_overlapping_routers():
    a, b = CommandRouter(tag="a"), CommandRouter(tag="b")
    for router in (a, b):
        router.command(Command.NIJENHUIS, summary="n")(lambda config: None)
    with pytest.raises(ValueError):
        collect_routes([a, b])


def test_run_writes_the_report_to_the_configured_path(tmp_path, capsys):
    target = tmp_path / "analyze.json"
    config = build_config(overrides={
        "command": "analyze", "metric": {"name": "round-s4"}, "region": {"n": 1},
        "output": {"path": str(target)},
    })
    assert run(config) == 0
    assert capsys.readouterr().out == ""
    report = json.loads(target.read_text())
    assert report["command"] == "analyze"
    assert report["errors"] == []


def test_run_fails_when_the_report_cannot_be_written(tmp_path):
    config = build_config(overrides={
        "command": "analyze", "region": {"n": 1},
        "output": {"path": str(tmp_path / "missing" / "report.json")},
    })
    assert run(config) == 1
