"""Exception types shared across the package."""


class BmcError(Exception):
    """Base class for all package-specific errors."""


class AssumptionViolated(BmcError):
    """Some bicluster patch contains no observed entry.

    The estimate is not unique in that case, so estimation refuses to run.
    ``patch`` identifies the first offending (row component, col component)
    pair using 1-based component ids, or is None when unknown (e.g. detected
    numerically from a singular system rather than from the partitions).
    """

    def __init__(self, message, patch=None):
        super().__init__(message)
        self.patch = patch


class NotPositiveDefinite(BmcError):
    """Factorization found the system matrix singular or indefinite."""


class MaxItersExceeded(BmcError):
    """Iterative solver exhausted its iteration budget before converging."""


class GradientUndefined(BmcError):
    """Objective gradient does not exist (zero residual makes log(rss) singular)."""


class FoldInfeasible(BmcError):
    """No cross-validation shuffle produced all-feasible training folds."""


class AssemblyCapExceeded(BmcError):
    """Requested sparse materialization exceeds the configured size cap."""


class ParseError(BmcError):
    """Input file could not be parsed; carries the file path and line number."""

    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line
