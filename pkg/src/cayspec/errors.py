"""Exception hierarchy shared by all cayspec modules.

ValidationError subclasses signal bad inputs (CLI exit code 2);
ComputationError subclasses signal failures of a well-posed computation
(CLI exit code 3).
"""


class CayspecError(Exception):
    """Base class for all cayspec errors."""


class ValidationError(CayspecError):
    """Invalid input: bad arguments, malformed files, violated preconditions."""


class ComputationError(CayspecError):
    """A well-posed computation could not be completed."""


class ParseError(ValidationError):
    """Malformed group file or group/set specification string."""


class NotAGroup(ValidationError):
    """A multiplication table violates a group axiom."""


class OrderTooLarge(ValidationError):
    """Requested group order exceeds the supported cap."""


class UnsupportedParameter(ValidationError):
    """Constructor parameter outside the supported range."""


class NotAbelian(ValidationError):
    """Operation requires an abelian group."""


class NotADivisor(ValidationError):
    """Subgroup order must divide the group order."""


class NotASubgroup(ValidationError):
    """The given subset is not closed under the group operation."""


class NotACell(ValidationError):
    """Cell index or dimension is invalid for the complex."""


class SizeCap(ComputationError):
    """Instance exceeds a documented size cap."""


class EnumerationCap(ComputationError):
    """Exhaustive enumeration would exceed the 2**28 budget."""


class NoConvergence(ComputationError):
    """Iterative solver hit its iteration cap.

    Carries the last residual so callers can report how close it got.
    """

    def __init__(self, message: str, residual: float = float("nan"), iterations: int = 0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class InconsistentSamples(ComputationError):
    """Randomized degree-sum samples disagree and admit no feasible degree vector."""
