from __future__ import annotations

from typing import Any


class ReuseMorError(RuntimeError):
    exit_code = 1


class ConfigError(ReuseMorError, ValueError):
    exit_code = 2


class DimensionMismatch(ReuseMorError, ValueError):
    pass


class SolverError(ReuseMorError):
    exit_code = 3


class GmresFailure(SolverError):
    """Base for GMRES failures; keeps the partial iterate and the report."""

    def __init__(self, message: str, *, x: Any = None, report: Any = None):
        super().__init__(message)
        self.x = x
        self.report = report


class GmresBreakdown(GmresFailure):
    pass


class GmresNotConverged(GmresFailure):
    pass


class SingularShiftError(SolverError):
    def __init__(self, message: str, *, shift: float | None = None):
        super().__init__(message)
        self.shift = shift


class ProjectionError(SolverError):
    pass


class SpaiError(SolverError):
    pass


class KroneckerAssemblyTooLarge(SolverError):
    pass


class MatrixIOError(ReuseMorError):
    exit_code = 4

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


class ReductionFailed(SolverError):
    """A reduction driver aborted; `report` holds the rows recorded so far."""

    def __init__(self, message: str, *, coords: tuple | None = None, report: Any = None):
        super().__init__(message)
        self.coords = coords
        self.report = report
