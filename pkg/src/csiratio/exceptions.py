"""Exception hierarchy shared by every module."""


class CsiRatioError(Exception):
    """Base class for all errors raised by :mod:`csiratio`."""


class InvalidConfigError(CsiRatioError, ValueError):
    """A configuration value violates its documented constraint."""


class DegenerateDenominatorError(CsiRatioError, ZeroDivisionError):
    """A CSI sample used as a ratio denominator is (numerically) zero."""


class ZeroBasisError(CsiRatioError, ValueError):
    """A basis vector vanished before normalization.

    Raised for the trivial candidates ``f = 0`` (or aliases of it) of the
    Doppler basis and for degenerate spatial bases.
    """


class RankDeficiencyError(CsiRatioError):
    """The measurement matrix has no numerical null space."""


class InsufficientPeaksError(CsiRatioError):
    """Fewer local maxima than requested were found in a spectrum."""

    def __init__(self, found, requested):
        self.found = found
        self.requested = requested
        super().__init__(f"found {found} local maxima, {requested} requested")


class IllConditionedError(CsiRatioError, ValueError):
    """A least-squares system is too ill-conditioned to trust."""

    def __init__(self, message, condition_number=float("nan")):
        self.condition_number = condition_number
        super().__init__(message)


class FormatError(CsiRatioError, ValueError):
    """A serialized tensor or config file is malformed."""


class IdentifiabilityWarning(UserWarning):
    """Delay/AoA are not identifiable from the supplied observations."""


class EstimationError(CsiRatioError):
    """An estimator stage failed; ``partial`` holds whatever was recovered."""

    def __init__(self, stage, cause, partial=None):
        self.stage = stage
        self.cause = cause
        self.partial = partial
        super().__init__(f"{stage} stage failed: {cause}")
