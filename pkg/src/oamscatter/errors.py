"""Exception types shared across the package."""


class PhysicsDomainError(ValueError):
    """Quantum numbers or beam parameters outside their physical domain."""


class ConfigError(ValueError):
    """A run configuration failed validation."""
