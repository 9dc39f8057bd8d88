"""Exception types shared across the package."""


class PrefsynthError(Exception):
    pass


class DimensionMismatchError(PrefsynthError):
    """Inputs do not share the same embedding dimension."""


class DegenerateQueryError(PrefsynthError):
    """Query whose response score is undefined (zero denominator)."""


class DegeneratePosteriorError(PrefsynthError):
    """Posterior has collapsed (zero trace) or is otherwise unusable."""


class DivergedSimulationError(PrefsynthError):
    """Simulated robot state became non-finite; the gains are unstable."""


class PoolExhaustedError(PrefsynthError):
    """No candidate pair remains after exclusions."""


class ConfigError(PrefsynthError):
    """Invalid run configuration."""
