"""Exception hierarchy shared by every subpackage."""

from typing import Optional


class LiftError(Exception):
    """Base class for all errors raised by stochastic_lifts."""


class InputError(LiftError, ValueError):
    """Malformed or mismatched input."""


class SizeLimitError(InputError):
    """A configured enumeration cap was exceeded."""

    def __init__(self, what: str, size: int, cap: int):
        self.what = what
        self.size = size
        self.cap = cap
        super().__init__(f"{what}: size {size} exceeds cap {cap}")


class ConditioningError(InputError):
    """Conditioning on an event of probability zero."""


class PreconditionError(InputError):
    """A documented precondition of an operation does not hold."""

    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        super().__init__(message)


class AssumptionError(LiftError):
    """An assumption of the main coupling construction fails."""

    def __init__(self, assumption: str, witness: Optional[str]):
        self.assumption = assumption
        self.witness = witness
        super().__init__(f"Assumption {assumption} fails: {witness}")


class PathLiftError(LiftError):
    """No lift of a path exists at some step."""

    def __init__(self, step: int, vertex: int):
        self.step = step
        self.vertex = vertex
        super().__init__(f"No lift at step {step}: no neighbour in the fibre of {vertex}")


class FixtureRegressionError(LiftError):
    """A golden fixture no longer verifies."""


class InvariantViolation(LiftError):
    """An internal invariant was found broken."""
