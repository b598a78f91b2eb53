"""Exception hierarchy shared by every subpackage."""


class ProbekitError(Exception):
    """Base class for all errors raised by probekit."""


class ConfigError(ProbekitError):
    """Invalid configuration input. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedExtension(ProbekitError):
    """ICMP extension region cannot be trusted (truncated, bad version...)."""


class OutOfRange(ProbekitError, ValueError):
    pass


class BackendError(ProbekitError):
    """Network backend failure (socket creation, permissions, I/O)."""


class ParseError(ProbekitError, ValueError):
    pass


class BadCommand(ProbekitError):
    def __init__(self, message, request_id="?"):
        self.request_id = request_id
        super().__init__(message)
