"""Engine exception types, each tagged with a machine-readable category
that the CLI maps to exit codes and structured stderr output."""


class StpufError(Exception):
    category = "engine"


class GateStalledError(StpufError):
    """Non-positive overdrive: composite V_TH reached the rail swing."""

    category = "gate-stalled"


class CalibrationRangeError(StpufError):
    """Trim budget exhausted before the ROs could be equalized."""

    category = "calibration-range"


class CalibrationInfeasibleError(StpufError):
    """No point in the search bounds satisfies every target band."""

    category = "calibration-infeasible"

    def __init__(self, message, best_point=None, violations=None):
        super().__init__(message)
        self.best_point = best_point or {}
        self.violations = violations or {}


class ProtocolError(StpufError):
    """Illegal bitcell protocol sequence (e.g. double MTJ programming)."""

    category = "protocol"


class ConfigError(StpufError):
    """Malformed or non-strict experiment configuration."""

    category = "config"
