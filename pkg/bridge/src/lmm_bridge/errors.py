"""Bridge error types."""


class BridgeError(Exception):
    """Base class for bridge failures."""


class StartupError(BridgeError):
    """The model could not be loaded or is unsupported."""


class BadRequestError(BridgeError):
    """The client sent something the bridge cannot process."""
