"""Exceptions for the du-opacity checker."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .models import Violation


class DuOpacityError(Exception):
    """Base exception for the du-opacity checker."""


class MalformedHistoryError(DuOpacityError):
    """Exception raised when an event sequence is not a well-formed history."""

    def __init__(self, violations: list[Violation]) -> None:
        """Initialize with every violation found, in event order."""
        self.violations = violations
        summary = "; ".join(f"event {v.index}: {v.reason}" for v in violations)
        super().__init__(f"Malformed history: {summary}")


class HistoryParseError(DuOpacityError):
    """Exception raised when history text does not follow the grammar."""

    def __init__(self, line: int, column: int, reason: str) -> None:
        """Initialize with the 1-based line and column of the offending token."""
        self.line = line
        self.column = column
        self.reason = reason
        super().__init__(f"line {line}, column {column}: {reason}")


class OutOfRangeError(DuOpacityError):
    """Exception raised when a prefix index lies outside the history."""


class UnknownTxnError(DuOpacityError):
    """Exception raised when a transaction does not participate in a history."""


class NoSuchReadError(DuOpacityError):
    """Exception raised when a history has no matching non-aborting read."""


class MalformedWitnessError(DuOpacityError):
    """Exception raised when a witness does not fit the history it is checked against."""


class InvalidWitnessError(DuOpacityError):
    """Exception raised when a witness is expected to verify but does not."""


class HypothesisViolatedError(DuOpacityError):
    """Exception raised when live-set normalization is applied outside its hypothesis."""


class BudgetExceededError(DuOpacityError):
    """Exception raised when a search explores more nodes than its budget allows."""

    def __init__(self, nodes: int) -> None:
        """Initialize with the number of nodes explored."""
        self.nodes = nodes
        super().__init__(f"Search budget exceeded after {nodes} nodes")


class TooLargeError(DuOpacityError):
    """Exception raised when the naive oracle is asked to enumerate too many transactions."""


class NotSequentialError(DuOpacityError):
    """Exception raised when a criterion defined on sequential histories gets another kind."""


class UnknownHistoryError(DuOpacityError):
    """Exception raised for an unknown corpus history name."""


class BoundsTooLargeError(DuOpacityError):
    """Exception raised when enumeration bounds exceed the hard caps."""


class InvalidConfigError(DuOpacityError):
    """Exception raised when a history generator configuration is invalid."""


class ReportFormatError(DuOpacityError):
    """Exception raised when a machine-readable report does not follow its schema."""


class InputError(DuOpacityError):
    """Exception raised when an input history cannot be read."""
