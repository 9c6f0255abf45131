"""Shared exception types."""

from __future__ import annotations


class QflabError(Exception):
    """Base class for all library errors."""


class BudgetExceededError(QflabError):
    """Raised when a computation would exceed its point/work budget.

    Carries how much work was done (or would be required) so callers can
    retry with a bigger budget; the CLI maps this to exit code 2.
    """

    def __init__(self, message: str, visited: int = 0, required: int | None = None):
        super().__init__(message)
        self.visited = visited
        self.required = required
