"""Exception hierarchy.

Every error raised by the library derives from :class:`PPGLossError`,
which is itself a :class:`ValueError`, so callers can catch broadly or
narrowly.
"""


class PPGLossError(ValueError):
    pass


class InvalidSignalError(PPGLossError):
    """Non-finite samples, empty sample array or non-positive rate."""


class ConstantSignalError(PPGLossError):
    pass


class TooShortError(PPGLossError):
    pass


class BadWindowError(PPGLossError):
    pass


class BadBandError(PPGLossError):
    pass


class BadLengthError(PPGLossError):
    pass


class MalformedError(PPGLossError):
    pass


class NoPeakError(PPGLossError):
    pass


class ZeroSpectrumError(PPGLossError):
    pass


class ZeroMassError(PPGLossError):
    pass


class DimensionMismatchError(PPGLossError):
    pass


class EmptyInputError(PPGLossError):
    pass


class LengthMismatchError(PPGLossError):
    pass


class RateMismatchError(PPGLossError):
    pass


class NoBeatsError(PPGLossError):
    pass


class BadConfigError(PPGLossError):
    pass


class ConstantInputError(PPGLossError):
    pass


class DivergedError(PPGLossError):
    pass


class ZeroVectorError(PPGLossError):
    pass
