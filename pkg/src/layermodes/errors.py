"""Exception types raised by the solver and the checks.

Every error derives from :class:`LayerModesError`; the numeric ones also
derive from :class:`NumericFailure` so the command line can map them to a
single exit status.
"""


class LayerModesError(Exception):
    """Base class for all package errors."""


class SchemaError(LayerModesError, ValueError):
    """Invalid input document or invalid constructor arguments."""

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class NumericFailure(LayerModesError):
    """A numerical routine could not produce a trustworthy answer."""


class CheckFailure(LayerModesError):
    """A verified inequality does not hold on computed data."""

    def __init__(self, message, lhs=None, rhs=None):
        self.lhs = lhs
        self.rhs = rhs
        super().__init__(message)


# profile / cross_section
class ThresholdOutOfRange(LayerModesError, ValueError):
    pass


class SubboxOutOfBounds(LayerModesError, ValueError):
    pass


# layer_solver
class DegenerateState(NumericFailure):
    pass


class BracketFailure(NumericFailure):
    pass


class NotAnEigenvalue(NumericFailure):
    pass


class OutOfDomain(LayerModesError, ValueError):
    pass


# general_solver
class StepFailure(NumericFailure):
    pass


class GridTooCoarse(NumericFailure):
    pass


class MissingDerivatives(LayerModesError, ValueError):
    pass


class OutsideSpectralWindow(LayerModesError, ValueError):
    pass


# analysis
class MissingWell(LayerModesError, ValueError):
    pass


class NotPiecewiseConstant(LayerModesError, TypeError):
    pass


class EvanescentLayerPresent(LayerModesError, ValueError):
    pass


class NotGuided(LayerModesError, ValueError):
    pass


class BandIntersectsWell(LayerModesError, ValueError):
    pass


class ModeBelowThreshold(LayerModesError, ValueError):
    def __init__(self, message, lams=()):
        self.lams = list(lams)
        super().__init__(message)


class NotMonotone(LayerModesError, ValueError):
    pass


class InvalidOrdering(LayerModesError, ValueError):
    pass


class WrongProfileShape(LayerModesError, ValueError):
    pass


class OutsideZone(LayerModesError, ValueError):
    pass


class NoNearbyEigenvalue(NumericFailure):
    pass
