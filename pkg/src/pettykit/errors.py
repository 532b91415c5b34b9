"""Exception hierarchy shared by all pettykit modules."""


class PettyKitError(Exception):
    """Base class for every error raised by pettykit."""


class DegenerateInput(PettyKitError, ValueError):
    """Points do not span a full-dimensional body."""


class DegenerateSample(DegenerateInput):
    """A randomly generated body came out lower-dimensional."""


class OriginNotInterior(PettyKitError, ValueError):
    """A body that must contain the origin in its interior does not."""


class InvalidP(PettyKitError, ValueError):
    pass


class InvalidEps(PettyKitError, ValueError):
    pass


class OutOfRange(PettyKitError, ValueError):
    pass


class UnknownName(PettyKitError, KeyError):
    pass


class DimensionMismatch(PettyKitError, ValueError):
    pass


class DegenerateDirection(PettyKitError, ArithmeticError):
    """A radial function evaluation hit a (near) zero gauge."""


class ConcavityViolation(PettyKitError, ValueError):
    """A density fails the concavity required for a convex measure.

    ``witness`` holds ``(x, y, lam)`` for which the mean inequality fails.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ConfigError(PettyKitError, ValueError):
    pass
