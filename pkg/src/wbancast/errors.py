class ConfigError(ValueError):
    """Raised when a scenario, topology or channel table fails validation."""


class UnusableLink(ValueError):
    """A link whose success probability is zero has no finite ETX."""
