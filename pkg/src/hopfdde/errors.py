"""Exception hierarchy shared by the analysis modules."""

from __future__ import annotations


class HopfDDEError(Exception):
    """Base class for every numerical failure raised by the package."""


class DomainError(HopfDDEError, ValueError):
    """An argument lies outside the domain of a closed-form expression."""


class BracketFailure(HopfDDEError):
    pass


class NoConvergence(HopfDDEError):
    pass


class EmptyResult(HopfDDEError):
    pass


class SingularJacobian(HopfDDEError):
    pass


class SpuriousRoot(HopfDDEError):
    """Newton converged on the (omega, tau) system but not on a root of Delta."""


class DegenerateRoot(HopfDDEError):
    pass


class SingularMatrix(HopfDDEError):
    pass


class DegenerateEigenvector(HopfDDEError):
    pass


class TransversalityZero(HopfDDEError):
    pass


class HistoryUnderflow(HopfDDEError):
    pass


class NonFiniteState(HopfDDEError):
    def __init__(self, time: float):
        super().__init__(f"non-finite state at t={time:.6g}")
        self.time = time


class StepTooLarge(HopfDDEError, ValueError):
    pass


class ConfigError(ValueError):
    """Malformed or out-of-range configuration; carries the offending field and line."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        where = ""
        if field is not None:
            where += f"field '{field}'"
        if line is not None:
            where += f"{' ' if where else ''}(line {line})"
        super().__init__(f"{where}: {message}" if where else message)
        self.field = field
        self.line = line
