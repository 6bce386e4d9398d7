"""Exception types raised across the package."""


class ParameterDomainError(ValueError):
    """A distribution or configuration parameter lies outside its domain."""


class DimensionError(ValueError):
    """Array shapes are inconsistent with each other or with a requirement."""


class ConfigurationError(ValueError):
    """A problem or experiment was configured in an unusable way."""


class SolverError(RuntimeError):
    """A forward solve or factorization failed."""


class FactorizationError(SolverError):
    """A matrix expected to be symmetric positive definite was not."""


class UndefinedMetricError(ValueError):
    """A metric was requested for an input where it is not defined."""


class DegenerateMaskError(ValueError):
    """A corruption mask lacks either clean or corrupted entries."""
