"""Exception hierarchy shared across the package."""


class LireError(Exception):
    """Base class for every error this package raises deliberately."""


class ForestFormatError(LireError, ValueError):
    """A forest document violates the file format or its structural invariants."""


class DimensionMismatchError(LireError, ValueError):
    """An instance or dataset has the wrong number of feature columns."""


class InvalidRegionKeyError(LireError, ValueError):
    """A region key has the wrong length or references a missing leaf."""


class IndexFormatError(LireError, ValueError):
    """A serialized region index is malformed or inconsistent."""


class TargetTaskMismatchError(LireError, ValueError):
    """Class targets were given for a regressor, or intervals for a classifier."""


class QueryValidationError(LireError, ValueError):
    """A counterfactual query is self-contradictory or out of range."""


class CESearchError(LireError):
    """A counterfactual search ended with no candidate to return."""


class NoLiveTargetRegionError(CESearchError):
    """No indexed region produces an output inside the target set."""


class NoQualifyingRowError(CESearchError):
    """No dataset row satisfies the target and the feature constraints."""


class AllRegionsInfeasibleError(CESearchError):
    """Every target region became empty after applying feature constraints."""


class CappedRegionSetError(LireError, ValueError):
    """An operation requires a complete region set but got a capped one."""


class InfeasiblePolytopeError(LireError):
    """A halfspace system given to a solver has no feasible point."""


class NumericalDiagnosticError(LireError, ArithmeticError):
    """A solver produced non-finite intermediates; inputs are likely degenerate."""
