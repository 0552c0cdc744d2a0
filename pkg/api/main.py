"""twistorkit - numerical twistor geometry of 4-manifolds from the command line."""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from models.config import RunConfig
from models.report import Report
from routers import ROUTERS, collect_routes
from services.config import build_config
from services.errors import EXIT_FAILURE, EXIT_INCONCLUSIVE, EXIT_OK, EXIT_VALIDATION, TwistorkitError
from services.report import emit_report

logger = logging.getLogger("twistorkit")

ROUTES = collect_routes(ROUTERS)


# ============================================================================
# Running a command
# ============================================================================

def run(config: RunConfig) -> int:
    """
    Execute one configured command and emit its report.

    Errors never escape: they are written into the report and mapped to
    exit codes (2 validation, 3 inconclusive, 1 anything else).
    """
    route = ROUTES[config.command]
    report = Report(command=config.command.value, config_echo=config.model_dump(mode="json"))
    code = EXIT_OK
    try:
        result = route.handler(config)
        report.per_point = result.per_point
        report.summaries = result.summaries
        report.errors = result.errors
        if result.inconclusive:
            code = EXIT_INCONCLUSIVE
    except TwistorkitError as exc:
        logger.error("%s failed: %s", config.command.value, exc.message)
        report.errors.append(exc.to_dict())
        code = exc.exit_code
    except Exception as exc:  # noqa: BLE001
        logger.exception("%s crashed", config.command.value)
        report.errors.append({"kind": "internal", "message": f"{type(exc).__name__}: {exc}"})
        code = EXIT_FAILURE
    if _emit(report, config) != EXIT_OK:
        return EXIT_FAILURE
    return code


def _emit(report: Report, config: RunConfig) -> int:
    try:
        text = emit_report(report, config.output.format, config.output.path)
    except TwistorkitError as exc:
        logger.error(exc.message)
        return EXIT_FAILURE
    if not config.output.path:
        sys.stdout.write(text)
    return EXIT_OK


# ============================================================================
# Command line
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twistorkit",
        description="Curvature, taming and pseudoholomorphic spheres on twistor spaces",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for command, route in ROUTES.items():
        cmd = sub.add_parser(command.value, help=route.summary, description=route.summary)
        cmd.add_argument("--config", help="TOML run file")
        cmd.add_argument("--metric", help="catalog metric name (replaces the file's metric table)")
        cmd.add_argument("--grid", type=int, help="region grid points per axis")
        cmd.add_argument("--N", dest="sphere_n", type=int, nargs="+", help="sphere grid sizes")
        cmd.add_argument("--t", dest="t_values", type=float, nargs="+", help="perturbation amplitudes")
        cmd.add_argument("--sign", type=int, choices=(1, -1), help="twistor structure J+ or J-")
        cmd.add_argument("--seed", type=int, help="seed for sampled planes and tangents")
        cmd.add_argument("--format", choices=("json", "markdown"), help="report format")
        cmd.add_argument("--output", help="write the report here instead of stdout")
        cmd.add_argument("--log-level", default="WARNING", help="logging level on stderr")
    return parser


def overrides_from(args: argparse.Namespace) -> Dict[str, Any]:
    """Flags given on the command line, shaped like the TOML tables they override."""
    out: Dict[str, Any] = {"command": args.command}
    tables = {
        ("metric", "name"): args.metric,
        ("region", "n"): args.grid,
        ("numerics", "sphere_n"): args.sphere_n,
        ("numerics", "sign"): args.sign,
        ("numerics", "seed"): args.seed,
        ("perturbation", "t"): args.t_values,
        ("output", "format"): args.format,
        ("output", "path"): args.output,
    }
    for (table, key), value in tables.items():
        if value is not None:
            out.setdefault(table, {})[key] = value
    return out


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        config = build_config(args.config, overrides_from(args))
    except TwistorkitError as exc:
        logger.error(exc.message)
        report = Report(command=args.command, config_echo=overrides_from(args), errors=[exc.to_dict()])
        sys.stdout.write(emit_report(report))
        return EXIT_VALIDATION
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
