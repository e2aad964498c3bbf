"""Exception types shared across the package."""


class HlavError(Exception):
    """Base class for all errors raised by hlav."""


class PreconditionError(HlavError, ValueError):
    """An argument violates an operation's stated precondition."""


class OutOfRangeError(PreconditionError, IndexError):
    """A query falls outside the range covered by a bitmap."""


class InvalidTupleError(PreconditionError):
    """Shift tuple is not strictly increasing, even and positive."""


class UnsupportedOrderError(PreconditionError):
    """Requested tuple size is not supported at desk scale."""


class DomainError(PreconditionError):
    """Evaluation requested beyond an arithmetic function's domain."""


class NotPrimeError(PreconditionError):
    """A modulus that must be prime is not."""


class ResourceExhaustedError(HlavError, MemoryError):
    """Requested sieve would exceed the configured memory budget."""


class StoreError(HlavError):
    """Base class for bitmap file problems."""


class StoreIOError(StoreError, OSError):
    """Reading or writing a file failed."""


class CorruptMagicError(StoreError):
    pass


class UnsupportedVersionError(StoreError):
    pass


class ChecksumMismatchError(StoreError):
    pass


class TruncatedFileError(StoreError):
    pass
