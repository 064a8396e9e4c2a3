"""Exception types raised by :mod:`hybridrf`."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class SingularNetworkError(InvalidArgumentError):
    """An analog network matrix does not have full column rank."""


class RankDeficientChannelError(InvalidArgumentError):
    """The effective channel cannot carry the requested number of streams."""


class ConfigError(ValueError):
    """An experiment file failed to parse or validate.

    ``lineno`` is the 1-based line in the source document, when known.
    """

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
