"""Exception types shared across the simulator and analysis pipeline."""


class WalkerSimError(Exception):
    """Base class for all errors raised by walkersim."""


class ConfigError(WalkerSimError, ValueError):
    """Invalid scenario, batch, or parameter configuration.

    ``field`` names the offending key (dotted path) when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NumericInputError(WalkerSimError, ValueError):
    pass


class StateError(WalkerSimError, RuntimeError):
    pass


class DegenerateTrialError(WalkerSimError, ValueError):
    pass


class EventSequenceError(WalkerSimError, ValueError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class FormatError(WalkerSimError, ValueError):
    """Malformed input file; ``row`` is the 1-based line number when known."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class InsufficientDataError(WalkerSimError, ValueError):
    pass


class SampleSizeError(WalkerSimError, ValueError):
    pass


class DegenerateSampleError(WalkerSimError, ValueError):
    pass
