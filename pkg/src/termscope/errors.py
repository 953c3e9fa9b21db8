"""Exception types shared across the package.

Every error raised on a data path derives from TermscopeError so callers
(and the CLI) can distinguish bad input from programming bugs.
"""


class TermscopeError(Exception):
    """Base class for all termscope data errors."""


class FormatError(TermscopeError):
    """A .semb payload violates the binary format.

    ``offset`` is the byte position of the offending field or value.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class BadMagic(FormatError):
    pass


class BadVersion(FormatError):
    pass


class TruncatedData(FormatError):
    pass


class NonFiniteValue(FormatError):
    pass


class DimMismatch(TermscopeError):
    pass


class MissingEmbedding(TermscopeError):
    pass


class DuplicateId(TermscopeError):
    pass


class WindowOutOfRange(TermscopeError):
    pass


class EmptySequence(TermscopeError):
    pass


class EmptyPool(TermscopeError):
    pass


class SpanOutOfRange(TermscopeError):
    pass


class UnsupportedWav(TermscopeError):
    pass


class EmptyTripletList(TermscopeError):
    pass


class AlreadyTagged(TermscopeError):
    pass


class EmptyCases(TermscopeError):
    pass
