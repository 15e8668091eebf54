"""Exception types shared across the library.

The CLI maps these onto exit codes: usage problems exit 2, numerical
failures exit 3, input/output failures exit 4.
"""

from __future__ import annotations

__all__ = [
    "GraphFormatError",
    "EmptyGraphError",
    "UnsupportedInputError",
    "NumericalError",
    "SingularSystemError",
]


class GraphFormatError(ValueError):
    """An edge-list source could not be parsed.

    Carries the 1-based line number of the offending line.
    """

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class EmptyGraphError(ValueError):
    """No usable edges remain after cleaning an input graph."""


class UnsupportedInputError(ValueError):
    """Structurally valid input outside an algorithm's supported domain."""


class NumericalError(ArithmeticError):
    """Base class for numerical failures."""


class SingularSystemError(NumericalError):
    """A linear system that should be definite was numerically singular."""
