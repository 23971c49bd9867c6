"""Exception hierarchy.

Every contract violation raises a subclass of :class:`SinomaError` so callers
can distinguish bad input from genuine bugs. Errors that are also input
validation problems inherit from ``ValueError``.
"""

from __future__ import annotations

__all__ = [
    "SinomaError",
    "InvalidSeries",
    "LengthMismatch",
    "DegenerateSeries",
    "ZeroCovariance",
    "NegativeLambda",
    "SlopeOutOfRange",
    "TooFewFluctuations",
    "RangeMismatch",
    "DegenerateBandwidth",
    "InvalidSlopeInputs",
    "DeltaOutOfRange",
    "NegativeVariance",
    "DegenerateDenominator",
    "NonPhysicalNoise",
    "InvalidLength",
    "InvalidCoefficient",
    "InfeasibleTarget",
    "MissingLambda",
]


class SinomaError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSeries(SinomaError, ValueError):
    """Series construction violates the contract (too short, non-finite, wrong shape)."""


class LengthMismatch(SinomaError, ValueError):
    """Two series that must be aligned have different lengths."""


class DegenerateSeries(SinomaError):
    """A required variance is zero, so the statistic is undefined."""


class ZeroCovariance(SinomaError):
    """Covariance is zero (or has the wrong sign for this operation)."""


class NegativeLambda(SinomaError, ValueError):
    """A noise-variance ratio must be >= 0 (or +inf)."""


class SlopeOutOfRange(SinomaError):
    """Slope lies outside the closed bracket [ols slope, inverse slope]."""


class TooFewFluctuations(SinomaError):
    """Segmentation produced fewer elementary fluctuations than required."""


class RangeMismatch(SinomaError, ValueError):
    """Two partitions do not cover the same index range."""


class DegenerateBandwidth(SinomaError):
    """Every segment of a series has zero local bandwidth."""


class InvalidSlopeInputs(SinomaError, ValueError):
    """slope-from-ratio inputs violate q > 0 or 0 < rma slope <= inverse slope."""


class DeltaOutOfRange(SinomaError, ValueError):
    """Endpoint explanatory-power difference must lie in (-1, 1)."""


class NegativeVariance(SinomaError, ValueError):
    """A variance argument must be >= 0."""


class DegenerateDenominator(SinomaError):
    """Noise recovery requires the two lambda values to differ."""


class NonPhysicalNoise(SinomaError):
    """Recovered noise variance is negative or exceeds the observed variance."""


class InvalidLength(SinomaError, ValueError):
    """Generator length argument below the documented minimum."""


class InvalidCoefficient(SinomaError, ValueError):
    """Autoregressive coefficient outside [0, 1)."""


class InfeasibleTarget(SinomaError):
    """No nonnegative noise-variance pair achieves the requested R^2."""


class MissingLambda(SinomaError, ValueError):
    """The errors-in-variables fit requires an explicit noise ratio."""
