"""Exception types shared across the package."""


class NotSmoothAtInfinity(ValueError):
    """A chart-rational function does not extend smoothly through w = 1/z."""


class QuadratureBudgetTooSmall(RuntimeError):
    """Quadrature node counts too small for the requested assembly."""


class ShapeMismatch(ValueError):
    """Matrix operands have incompatible shapes."""


class UnknownCoefficientOrder(ValueError):
    """A star-product coefficient beyond the available orders was requested."""


class DegenerateTable(ValueError):
    """A convergence table has too few usable records for a fit."""


class ParseError(ValueError):
    """An experiment config file could not be parsed."""


class ValidationError(ValueError):
    """An experiment config parsed but failed semantic validation."""


class CacheCorruption(RuntimeError):
    """A cached matrix file failed its integrity checks."""
