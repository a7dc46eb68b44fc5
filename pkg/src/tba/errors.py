"""Exception hierarchy shared by all tba modules.

The CLI maps these onto its stable exit codes: ParseError and
ValidationError exit 2, DisconnectedWorkspaceError 3, GoalPlacementError 4,
OracleCapacityError 5.  Everything else is a bug and escapes as a traceback.
"""


class TbaError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(TbaError):
    """Malformed input file (map, goals, ordering or cache)."""


class ValidationError(TbaError):
    """Structurally valid input that violates a model invariant."""


class DisconnectedWorkspaceError(TbaError):
    """The free space is not connected; some vertex pair is unreachable."""


class GoalPlacementError(TbaError):
    """A goal lies outside the closure of free space."""

    def __init__(self, goal_index: int, message: str):
        super().__init__(message)
        self.goal_index = goal_index


class OracleCapacityError(TbaError):
    """Exact-solver guard: too many goals for the dynamic program."""


class DomainError(TbaError):
    """A query point lies outside the closure of free space."""


class NumericalError(TbaError):
    """A numeric routine hit a degenerate or non-finite intermediate."""
