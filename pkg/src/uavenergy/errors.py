"""Exception hierarchy shared by all model components."""


class ModelError(Exception):
    """Base class for all toolkit errors."""


class SingularOrientation(ModelError):
    """Roll or pitch too close to +-pi/2 for the Euler-rate transform."""


class DimensionMismatch(ModelError):
    """Vector length does not match the configured rotor count."""


class NegativeSpeed(ModelError):
    """Motor speeds must be non-negative."""


class OutOfRange(ModelError):
    """Value outside the domain of a curve or segment table."""


class InvalidVoltage(ModelError):
    """Battery voltage must be positive to compute ESC input current."""


class PowerInfeasible(ModelError):
    """Demanded power exceeds what the battery can deliver."""


class InvalidOrder(ModelError):
    """Discretization order must be at least 1."""


class SamplingMismatch(ModelError):
    """Sub-models were discretized with different sampling times."""


class CoincidentTarget(ModelError):
    """Camera alignment is undefined when UAV and target coincide."""


class DegenerateFov(ModelError):
    """Field of view produces a non-positive tangent."""


class MalformedLog(ModelError):
    """Flight log violates the expected CSV schema."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NoSensorConfigured(ModelError):
    """Requested a sensor report but the config has no sensor block."""


class ConfigError(ModelError):
    """Config file missing, unreadable, or failing schema validation."""


class ConstraintHalt(ModelError):
    """Simulation stopped by the optional constraint-halt policy."""
