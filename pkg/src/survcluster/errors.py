"""Exception hierarchy.

Three families map onto the CLI exit codes: validation problems
(InvalidInputError and subclasses, exit 2), data problems (DataError and
subclasses, exit 3), and numerical problems (NumericalError and subclasses,
exit 4).
"""


class SurvClusterError(Exception):
    """Base class for all library errors."""


class InvalidInputError(SurvClusterError):
    """Arguments violate a documented precondition."""


class InvalidSpecError(InvalidInputError):
    """A cohort or network specification is internally inconsistent."""


class InvalidPlanError(InvalidInputError):
    """A cross-validation fold plan cannot be executed."""


class UnsupportedKError(InvalidInputError):
    """Group count exceeds what an exhaustive routine supports."""


class DataError(SurvClusterError):
    """Input data cannot be used (missing files, malformed CSV, ...)."""


class NoEventsError(DataError):
    """Every subject in the input is censored; survival statistics are undefined."""


class NumericalError(SurvClusterError):
    """A numerical routine could not produce a defined result."""


class SingularVarianceError(NumericalError):
    """The reduced variance-covariance matrix is not positive definite."""


class UndefinedCIndexError(NumericalError):
    """No comparable pair exists; the concordance index is undefined."""


class UndefinedAUCError(NumericalError):
    """A one-vs-rest split contains a single class; AUC is undefined."""


class UndefinedRowError(NumericalError):
    """A confusion-matrix row has no members and cannot be normalized."""
