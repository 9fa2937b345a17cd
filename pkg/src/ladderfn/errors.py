"""Exception hierarchy.

Input problems derive from ``ValueError`` and numerical failures from
``ArithmeticError`` so callers that only know the builtins still catch them.
"""


class LadderError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(LadderError, ValueError):
    """A parameter or phase point lies outside its domain."""


class ConfigurationError(InvalidInputError):
    """System parameters do not describe a potential well."""


class NoBoundMotionError(InvalidInputError):
    """The requested energy admits no bounded periodic motion."""


class StencilError(InvalidInputError):
    """A finite-difference stencil left the domain of the evaluated function."""


class NumericalError(LadderError, ArithmeticError):
    """A numerical procedure failed to converge or lost its bracket."""


class DegenerateFactorError(NumericalError):
    """The factorization function of a factor vanished."""


class ConstructionError(NumericalError):
    """An internal table (phase table, grid) violated its structural invariants."""


class AlgebraViolationError(LadderError):
    """A bracket, factorization or signature identity failed beyond tolerance.

    ``worst`` carries whatever identifies the offending sample.
    """

    def __init__(self, message, worst=None):
        super().__init__(message)
        self.worst = worst


class BranchSafetyError(AlgebraViolationError):
    """The base factor left the right half-plane, so its principal log is unsafe."""


class LimitViolationError(AlgebraViolationError):
    """A limiting case disagrees with its closed form."""
