"""Exception hierarchy.

Errors fall into three families that the CLI maps to exit codes:
configuration problems, data problems and numerical failures.
"""


class MpecError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1


class ConfigError(MpecError, ValueError):
    exit_code = 2


class DataError(MpecError, ValueError):
    exit_code = 3


class NumericalError(MpecError, ArithmeticError):
    exit_code = 4


# numerical
class NumericalFailure(NumericalError):
    """An iterative routine did not converge or produced non-finite values."""


class NotPositiveDefinite(NumericalError):
    """A matrix required to be SPD has a non-positive eigenvalue."""


# shapes and inputs
class ShapeError(DataError):
    pass


class EmptyInput(DataError):
    pass


class BadLength(DataError):
    pass


class LengthMismatch(DataError):
    pass


class BadK(DataError):
    pass


class InsufficientSamples(DataError):
    pass


class DegenerateLabels(DataError):
    pass


class SingleClass(DataError):
    pass


class ClusterTooSmall(DataError):
    pass


class StratifyError(DataError):
    pass


# trial archives and model files
class ArchiveError(DataError):
    pass


class BadMagic(ArchiveError):
    pass


class TruncatedFile(ArchiveError):
    pass


class VersionUnsupported(ArchiveError):
    pass


class LabelOutOfRange(ArchiveError):
    pass


class ConvergenceWarning(UserWarning):
    """An iteration stopped at its cap before reaching tolerance."""
