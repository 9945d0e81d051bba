"""Exception hierarchy shared by every module."""


class IrlsCutError(Exception):
    """Base class for all package errors."""


class InputError(IrlsCutError, ValueError):
    """Malformed or invalid problem input."""


class NonPositiveCapacity(InputError):
    pass


class DisconnectedGraph(InputError):
    pass


class SourceEqualsSink(InputError):
    pass


class InvalidLabeling(InputError):
    pass


class BlockCountExceedsNodes(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class PreconditionerDimensionMismatch(DimensionMismatch):
    pass


class PatternChanged(InputError):
    pass


class InvalidParams(InputError):
    pass


class TooLargeForEnumeration(InputError):
    pass


class ZeroOptimum(InputError):
    pass


class SolverError(IrlsCutError, RuntimeError):
    """A numerical routine failed."""


class ZeroPivot(SolverError):
    pass


class BreakdownNonSpd(SolverError):
    pass


class DegenerateClustering(SolverError):
    pass


class InvariantViolation(IrlsCutError, AssertionError):
    """An internal consistency check failed."""
