"""Exception hierarchy shared by every stage of the reduction workbench."""

from __future__ import annotations

__all__ = ["QCollapseError", "InputError", "BudgetError", "DegenerateInstanceError", "StageError"]


class QCollapseError(Exception):
    """Base class for all errors raised by the package."""


class InputError(QCollapseError, ValueError):
    """Malformed or inconsistent input (bad lengths, invariant violations, parse errors)."""


class BudgetError(QCollapseError, RuntimeError):
    """An exhaustive enumeration or net would exceed its configured budget."""


class DegenerateInstanceError(QCollapseError, ValueError):
    """The instance is valid but the requested construction is undefined for it (e.g. B = 0)."""


class StageError(QCollapseError, RuntimeError):
    """Wraps an error raised inside one pipeline stage, tagging it with the stage name."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
