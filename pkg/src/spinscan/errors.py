"""Exception taxonomy shared across the package.

Two broad families matter for the CLI exit-code mapping: ParameterError
(bad arguments or configuration, exit 2) and DataError (unreadable or
inconsistent data, exit 3).  Solver failures are DataErrors as well since
they surface mid-pipeline with a stage name attached.
"""


class SpinscanError(Exception):
    """Base class for everything raised deliberately by this package."""


class ParameterError(SpinscanError, ValueError):
    """Invalid argument, configuration value, or out-of-range coordinate."""


class DataError(SpinscanError):
    """File or payload content that cannot be used."""


class StackFormatError(DataError):
    """Malformed frame-stack container (bad magic, truncation, version)."""


class OvfError(DataError):
    """Malformed or unsupported OVF input."""


class WavError(DataError):
    """Malformed or unsupported WAV input."""


class ManifestError(DataError):
    """Session manifest fails validation."""


class IntegrationError(DataError):
    """Numerical blow-up (NaN/Inf) during time integration."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"non-finite magnetization at step {step}")


class RelaxationError(DataError):
    """Relaxation failed to reach the torque tolerance within the step budget."""
