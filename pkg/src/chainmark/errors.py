"""Exception types shared across chainmark modules."""


class ChainmarkError(Exception):
    pass


class ParseError(ChainmarkError, ValueError):
    """Malformed netpbm input. ``offset`` is the byte position of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class UnsupportedDepth(ChainmarkError, ValueError):
    pass


class DimensionError(ChainmarkError, ValueError):
    pass


class CapacityError(ChainmarkError):
    """Not enough fit columns to carry the requested number of bits."""

    def __init__(self, available, required):
        super().__init__(f"image carries {available} bits, {required} required")
        self.available = available
        self.required = required


class DecodeFailure(ChainmarkError, ValueError):
    pass


class PayloadTooLarge(ChainmarkError, ValueError):
    pass


class FrameError(ChainmarkError, ValueError):
    pass


class BadLength(FrameError):
    pass


class BadCrc(FrameError):
    pass


class BadUtf8(FrameError):
    pass


class NoFeasibleStep(ChainmarkError, ValueError):
    pass


class EmptySequence(ChainmarkError, ValueError):
    pass


class LagMismatch(ChainmarkError, ValueError):
    pass


class StorageError(ChainmarkError, OSError):
    pass
