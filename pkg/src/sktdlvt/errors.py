"""Exception types raised across the package."""


class SktDlvtError(Exception):
    """Base class for all package errors."""


class AxisMismatch(SktDlvtError, ValueError):
    """An echo matrix carries the wrong axis tags for the requested transform."""


class SwathOverflow(SktDlvtError, ValueError):
    """A target envelope leaves the simulated fast-time window."""


class PlanMismatch(SktDlvtError, ValueError):
    """A resampling plan does not match the data it is applied to."""


class NoValidPlan(SktDlvtError, ValueError):
    """No segment count satisfies the segment-duration criterion."""


class AlreadyCorrected(SktDlvtError, ValueError):
    """Frequency-walk correction was requested twice on the same spectrum."""


class AmbiguousMaximum(SktDlvtError, RuntimeError):
    """Top two search candidates are too close to call."""


class DivergentSubtraction(SktDlvtError, RuntimeError):
    """A CLEAN subtraction increased the residual energy."""


class CostGuard(SktDlvtError, ValueError):
    """Input size exceeds the configured cost guard."""


class ConfigError(SktDlvtError, ValueError):
    """Invalid run configuration."""
