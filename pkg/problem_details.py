"""
Problem records for kinchem commands.

Every failure that leaves the process is described by a ProblemDetail
record (RFC 7807 layout, with the HTTP status replaced by the process
exit code) written as JSON to stderr.

Usage:
    from problem_details import ConfigError, emit_problem, problem_from_exception

    try:
        run()
    except KinchemError as exc:
        problem = problem_from_exception(exc, instance="simulate")
        emit_problem(problem)
        sys.exit(problem.status)
"""

from __future__ import annotations

import json
import logging
import sys
import uuid
from typing import Any, Optional, TextIO

from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)

BASE_TYPE_URL = "urn:kinchem:problem"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BLOWUP = 2
EXIT_NUMERICAL = 3


# ── Models ────────────────────────────────────────────────────────────


class FieldError(BaseModel):
    """Per-field configuration error."""

    field: str
    message: str
    line: Optional[int] = None


class ProblemDetail(BaseModel):
    """Problem record emitted on stderr."""

    type: str = Field(
        default=f"{BASE_TYPE_URL}:error",
        description="URN identifying the problem type",
    )
    title: str = Field(..., description="Short human-readable summary")
    status: int = Field(..., description="Process exit code")
    detail: Optional[str] = Field(
        None, description="Explanation specific to this occurrence"
    )
    instance: Optional[str] = Field(
        None, description="Subcommand that raised the problem"
    )
    code: str = Field(..., description="Machine-readable error code (SCREAMING_SNAKE)")
    errors: Optional[list[FieldError]] = None
    diagnostics: Optional[dict[str, Any]] = None
    correlationId: Optional[str] = None


# ── Predefined problem types ─────────────────────────────────────────

# (slug, default_title, default_code)
PROBLEMS: dict[int, tuple[str, str, str]] = {
    EXIT_USAGE: ("invalid-input", "The configuration or arguments are not valid.", "INVALID_INPUT"),
    EXIT_NUMERICAL: ("numerical-failure", "The computation failed numerically.", "NUMERICAL_FAILURE"),
}


# ── Exceptions ────────────────────────────────────────────────────────


class KinchemError(Exception):
    """Base class for all kinchem failures."""

    exit_code: int = EXIT_NUMERICAL
    code: str = "NUMERICAL_FAILURE"
    title: str = "The computation failed numerically."

    def __init__(
        self,
        detail: str,
        *,
        errors: list[FieldError] | None = None,
        diagnostics: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(detail)
        self.detail = detail
        self.errors = errors
        self.diagnostics = diagnostics


class ConfigError(KinchemError):
    exit_code = EXIT_USAGE
    code = "CONFIG_INVALID"
    title = "The run configuration is not valid."


class UsageError(KinchemError):
    exit_code = EXIT_USAGE
    code = "USAGE"
    title = "The command line is not valid."


class InadmissibleExponents(KinchemError):
    exit_code = EXIT_USAGE
    code = "EXPONENTS_INADMISSIBLE"
    title = "The exponent pair is outside the admissible set."


class UnsupportedVelocitySet(KinchemError):
    exit_code = EXIT_USAGE
    code = "VELOCITY_SET_UNSUPPORTED"
    title = "The operation is not defined for this velocity set."


class CriterionInapplicable(KinchemError):
    exit_code = EXIT_USAGE
    code = "CRITERION_INAPPLICABLE"
    title = "Subcritical mass, criterion inapplicable."


class NumericalError(KinchemError):
    pass


class CFLViolation(NumericalError):
    code = "CFL_VIOLATION"
    title = "The time step violates the stability bound."


class SingularityError(NumericalError):
    code = "SINGULARITY"
    title = "Evaluation at a singular point."


class QuadratureError(NumericalError):
    code = "QUADRATURE_DIVERGED"
    title = "Adaptive quadrature did not converge."


# ── Helpers ───────────────────────────────────────────────────────────


def build_problem(
    status: int,
    *,
    detail: str | None = None,
    instance: str | None = None,
    code: str | None = None,
    title: str | None = None,
    errors: list[FieldError] | None = None,
    diagnostics: dict[str, Any] | None = None,
    correlation_id: str | None = None,
) -> ProblemDetail:
    """Build a ProblemDetail with defaults per exit code."""
    slug, default_title, default_code = PROBLEMS.get(
        status, ("error", "Error", "ERROR")
    )
    return ProblemDetail(
        type=f"{BASE_TYPE_URL}:{slug}",
        title=title or default_title,
        status=status,
        detail=detail,
        instance=instance,
        code=code or default_code,
        errors=errors,
        diagnostics=diagnostics,
        correlationId=correlation_id or str(uuid.uuid4()),
    )


def problem_from_exception(exc: BaseException, *, instance: str | None = None) -> ProblemDetail:
    """Map an exception to its problem record."""
    if isinstance(exc, KinchemError):
        return build_problem(
            exc.exit_code,
            detail=exc.detail,
            instance=instance,
            code=exc.code,
            title=exc.title,
            errors=exc.errors,
            diagnostics=exc.diagnostics,
        )
    rid = str(uuid.uuid4())
    logger.error(
        "Unhandled exception (rid=%s, command=%s): %s",
        rid,
        instance,
        exc,
        exc_info=exc,
    )
    return build_problem(
        EXIT_NUMERICAL,
        detail=f"Unexpected {type(exc).__name__}: {exc}. Quote correlation ID '{rid}'.",
        instance=instance,
        code="INTERNAL_ERROR",
        correlation_id=rid,
    )


def _log_problem(problem: ProblemDetail) -> None:
    """Log the problem with structured dimensions."""
    log_fn = logger.error if problem.status >= EXIT_NUMERICAL else logger.warning
    dimensions = {
        "problem_type": problem.type,
        "problem_code": problem.code,
        "problem_status": str(problem.status),
        "problem_title": problem.title,
        "correlation_id": problem.correlationId or "",
        "command": problem.instance or "unknown",
    }
    log_fn(
        "ProblemDetail %d %s %s",
        problem.status,
        problem.code,
        problem.instance or "unknown",
        extra={"custom_dimensions": dimensions},
    )


def emit_problem(problem: ProblemDetail, stream: TextIO | None = None) -> int:
    """Log the problem, write it as JSON and return its exit code."""
    _log_problem(problem)
    print(
        json.dumps(problem.model_dump(exclude_none=True), indent=2),
        file=stream or sys.stderr,
    )
    return problem.status
