"""Exception types shared across the package."""


class RamanPulseError(Exception):
    """Base class for all library errors."""


class ValidationError(RamanPulseError, ValueError):
    """Invalid arguments, configuration, or input files."""


class DomainError(RamanPulseError, ValueError):
    """Operation is mathematically undefined for the given inputs."""


class UnsupportedError(RamanPulseError):
    """The requested computation path does not cover these inputs."""


class NumericError(RamanPulseError, RuntimeError):
    """Quadrature or integration failed to reach the requested accuracy."""


class PoleError(DomainError):
    """Drive synthesis got too close to the Rabi-frequency pole.

    Raised when the ground-state amplitude nearly vanishes while the drive
    numerator does not; reduce the target efficiency below the bound.
    """


class ProtocolError(RamanPulseError):
    """Illegal operation in a gate-level protocol replay."""


class LayoutError(ProtocolError):
    """A gate refers to a register the state does not carry."""


class ModelError(NumericError):
    """Simulation left the regime where the truncated model is valid."""
