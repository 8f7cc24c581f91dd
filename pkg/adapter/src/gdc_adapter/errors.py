"""Exception hierarchy for the adapter."""


class AdapterError(Exception):
    """Base class for all adapter failures."""


class ConfigError(AdapterError):
    """Invalid adapter configuration."""


class ManifestError(AdapterError):
    """Malformed generation manifest."""


class EmptyClass(AdapterError):
    """A class subdirectory contains no readable images."""


class BackendUnavailable(AdapterError):
    """The requested generation or encoding backend cannot be loaded."""
