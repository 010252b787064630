"""Exception hierarchy shared by every module."""


class SpectralLabError(Exception):
    """Base class for all errors raised by spectral_lab."""


class NotHermitian(SpectralLabError, ValueError):
    pass


class NoConvergence(SpectralLabError, ArithmeticError):
    pass


class DimensionMismatch(SpectralLabError, ValueError):
    pass


class UnsupportedKODimension(SpectralLabError, ValueError):
    pass


class ZeroState(SpectralLabError, ValueError):
    pass


class NegativeArgument(SpectralLabError, ValueError):
    pass


class NonSmoothCutoff(SpectralLabError, ValueError):
    pass


class NotSU2(SpectralLabError, ValueError):
    pass


class NonPositiveInput(SpectralLabError, ValueError):
    pass


class InvalidParams(SpectralLabError, ValueError):
    pass
