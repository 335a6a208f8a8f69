"""Exception hierarchy shared across the package.

Every failure mode raised by the library is a subclass of SemiwaveError, so
callers (and the command line front end) can map failures onto exit codes
without matching on message strings.
"""


class SemiwaveError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDimensionError(SemiwaveError):
    """Space dimension outside the supported range."""


class InvalidExponentError(SemiwaveError):
    """Nonlinearity exponent outside (1, inf), or a degenerate pair."""


class InvalidParameterError(SemiwaveError):
    """A scalar parameter violates its stated range."""


class InvalidProfileError(SemiwaveError):
    """A damping or potential profile violates its decay or sign constraints."""


class InvalidGridError(SemiwaveError):
    """Non-positive or inconsistent grid parameters."""


class InvalidQuadratureError(SemiwaveError):
    """Quadrature rule too small or malformed."""


class UnsupportedOrderError(SemiwaveError):
    """Requested derivative order beyond what the cutoff supports."""


class UnsupportedDimensionError(SemiwaveError):
    """Operation only implemented for specific dimensions (oracle: n = 3)."""


class NontrivialityError(SemiwaveError):
    """Initial data bundle is identically zero."""


class ConfigurationError(SemiwaveError):
    """A run plan or grid configuration is invalid (CFL, cone coverage, ...)."""


class ConfigKeyError(ConfigurationError):
    """Unknown or missing configuration key; carries the full key path."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class SupportError(SemiwaveError):
    """Test function does not vanish by the end of the run."""


class UnsupportedRegimeError(SemiwaveError):
    """Sweep requested in a critical or outside-blow-up regime."""


class SweepFailedError(SemiwaveError):
    """Too many censored points, or the bootstrap run did not blow up."""


class InsufficientDataError(SemiwaveError):
    """Not enough uncensored points for a fit or verdict."""


class IncomparableSweepsError(SemiwaveError):
    """Two sweeps differ in more than their coefficient profiles."""


class HypothesisViolatedError(SemiwaveError):
    """ODE-lemma parameters violate p2 < p1 + 1."""


class NumericalFailureError(SemiwaveError):
    """Overflow or non-finite values where the algorithm requires finiteness."""


class ArtifactIOError(SemiwaveError):
    """Output directory or artifact file could not be written or read."""
