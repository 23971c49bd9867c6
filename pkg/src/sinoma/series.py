"""Series container and moment statistics.

Everything downstream (slope estimators, fluctuation segmentation, the noise
matching loop) is built on the population moments computed here. Variances
and covariances divide by N, not N - 1; every formula in the package uses
only ratios of second moments, so the convention merely has to be fixed once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSeries, InvalidSeries, LengthMismatch

__all__ = ["Series", "MomentSummary", "PairedSeries", "summarize", "normalize_to_unit_sd"]


def _as_readonly_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != 1:
        raise InvalidSeries(f"series must be one-dimensional, got shape {arr.shape}")
    if arr.size < 3:
        raise InvalidSeries(f"series needs at least 3 samples, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InvalidSeries("series contains NaN or infinite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Series:
    """An ordered sequence of finite real samples.

    The sample index carries the serial structure (time step or transect
    position); statistics of this class ignore it, the segmentation in
    :mod:`sinoma.fluctuations` does not.
    """

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_readonly_array(self.values))

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def mean(self) -> float:
        return float(np.mean(self.values))

    def var(self) -> float:
        """Population variance (divide by N)."""
        return float(np.var(self.values))

    def sd(self) -> float:
        return math.sqrt(self.var())


@dataclass(frozen=True)
class MomentSummary:
    """Means, population variances, covariance and R^2 of an aligned pair."""

    mean_x: float
    mean_y: float
    var_x: float
    var_y: float
    cov_xy: float
    r_squared: float

    @property
    def r(self) -> float:
        """Pearson correlation magnitude, sign taken from the covariance."""
        return math.copysign(math.sqrt(self.r_squared), self.cov_xy)


def summarize(x: Series, y: Series) -> MomentSummary:
    """Population moments of an aligned pair.

    Raises
    ------
    LengthMismatch
        If the two series have different lengths.
    DegenerateSeries
        If either variance is zero (R^2 undefined).
    """
    if x.n != y.n:
        raise LengthMismatch(f"series lengths differ: {x.n} vs {y.n}")
    xv, yv = x.values, y.values
    mean_x = float(np.mean(xv))
    mean_y = float(np.mean(yv))
    dx = xv - mean_x
    dy = yv - mean_y
    var_x = float(np.mean(dx * dx))
    var_y = float(np.mean(dy * dy))
    if var_x == 0.0 or var_y == 0.0:
        raise DegenerateSeries("zero variance: R^2 undefined")
    cov_xy = float(np.mean(dx * dy))
    # Cauchy-Schwarz can be violated by a few ulp for collinear data; clamp.
    r_squared = min(cov_xy * cov_xy / (var_x * var_y), 1.0)
    return MomentSummary(mean_x, mean_y, var_x, var_y, cov_xy, r_squared)


@dataclass(frozen=True)
class PairedSeries:
    """Aligned noisy predictor and predictand with cached moment summary."""

    x: Series
    y: Series
    summary: MomentSummary = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "summary", summarize(self.x, self.y))

    @classmethod
    def from_arrays(cls, x, y) -> "PairedSeries":
        return cls(Series(x), Series(y))

    @property
    def n(self) -> int:
        return self.x.n


def normalize_to_unit_sd(series: Series) -> Series:
    """Scale a series so its population standard deviation is one.

    Values are divided by the current standard deviation; the mean scales
    with them (no centering).
    """
    sd = series.sd()
    if sd == 0.0:
        raise DegenerateSeries("cannot normalize a constant series")
    return Series(series.values / sd)
