"""
twistorkit errors
One hierarchy for every failure the toolkit reports.

Each error knows the CLI exit code it maps to and how to serialize itself
into a report, so handlers never need to special-case exception types.
"""

from typing import Any, Dict, Optional


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_INCONCLUSIVE = 3


class TwistorkitError(Exception):
    """Base for all toolkit errors."""

    exit_code: int = EXIT_FAILURE
    kind: str = "error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"kind": self.kind, "message": self.message}
        if self.details:
            payload["details"] = {k: _plain(v) for k, v in self.details.items()}
        return payload


def _plain(value: Any) -> Any:
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


# ─────────────────────────────────────────────────────────────
# Validation (exit 2)
# ─────────────────────────────────────────────────────────────

class ArgumentError(TwistorkitError):
    exit_code = EXIT_VALIDATION
    kind = "argument"


class ConfigError(TwistorkitError):
    exit_code = EXIT_VALIDATION
    kind = "config"


class CatalogLookupError(TwistorkitError):
    exit_code = EXIT_VALIDATION
    kind = "lookup"


class ExprSyntaxError(TwistorkitError):
    exit_code = EXIT_VALIDATION
    kind = "syntax"

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}", offset=offset)
        self.offset = offset


class UnknownIdentifierError(TwistorkitError):
    exit_code = EXIT_VALIDATION
    kind = "unknown-identifier"

    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier '{name}' at offset {offset}", name=name, offset=offset)
        self.name = name
        self.offset = offset


class DomainError(TwistorkitError):
    exit_code = EXIT_VALIDATION
    kind = "domain"


class ChartNotHyperkaehlerError(TwistorkitError):
    exit_code = EXIT_VALIDATION
    kind = "chart-not-hyperkaehler"


# ─────────────────────────────────────────────────────────────
# Numerical failures
# ─────────────────────────────────────────────────────────────

class EvaluationError(TwistorkitError):
    kind = "evaluation"


class ValidityError(TwistorkitError):
    kind = "validity"

    def __init__(self, message: str, point: Optional[Any] = None):
        super().__init__(message, point=point)
        self.point = point


class ComparisonError(TwistorkitError):
    kind = "comparison"


class GridError(TwistorkitError):
    kind = "grid"


class TransportError(TwistorkitError):
    kind = "transport"


class NumericalError(TwistorkitError):
    kind = "numerical"


class InconclusiveError(TwistorkitError):
    """Borderline numerics: a scientific outcome, not a crash."""

    exit_code = EXIT_INCONCLUSIVE
    kind = "inconclusive"
