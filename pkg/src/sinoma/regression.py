"""Closed-form slope estimators for noisy linear pairs.

Model: the unobserved variables satisfy ``y = c * x + c0``; the observations
``x' = x + eps`` and ``y' = y + del`` carry independent white noise with
variances ``s2_eps`` and ``s2_del``. When the noise ratio
``lam = s2_del / s2_eps`` is known, the consistent slope is the positive root
of the quadratic

    cov * c**2 + (lam * var_x - var_y) * c - lam * cov = 0,

where cov, var_x, var_y are the observed moments. Three special cases have
familiar names:

    lam = +inf        ->  ordinary least squares,      c = cov / var_x
    lam = var_y/var_x ->  reduced major axis (variance matching),
                          c = sqrt(var_y / var_x)
    lam = 0           ->  inverse least squares,       c = var_y / cov

For every valid pair ``c_ols <= c_rma <= c_inv`` with equality only at
perfect correlation, and ``c_ols / R = c_rma = R * c_inv``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import (
    DegenerateSeries,
    NegativeLambda,
    SlopeOutOfRange,
    ZeroCovariance,
)
from .series import PairedSeries, Series

__all__ = [
    "SlopeEstimate",
    "fit_ols",
    "fit_inv",
    "fit_rma",
    "fit_evm",
    "lambda_from_slope",
    "predict",
    "variance_ratio",
    "sign_normalize",
    "rescale_if_steep",
    "STEEP_SLOPE_THRESHOLD",
]

# A fitted ols slope above this triggers predictand rescaling before the
# noise-matching loop; see rescale_if_steep.
STEEP_SLOPE_THRESHOLD = 3.0


@dataclass(frozen=True)
class SlopeEstimate:
    """A fitted slope/intercept with the noise-ratio assumption that produced it.

    ``lambda_assumed`` is the noise-variance ratio the method presumes:
    ``math.inf`` for ols, 0 for inverse least squares, ``var_y/var_x`` for
    reduced major axis, the caller's value for the general fit.
    """

    slope: float
    intercept: float
    method: str  # "ols" | "inv" | "rma" | "evm" | "sinoma"
    lambda_assumed: float

    def with_sign(self, sign: float) -> "SlopeEstimate":
        """Undo an upstream predictand sign flip (slope and intercept flip)."""
        if sign == 1.0:
            return self
        return replace(self, slope=sign * self.slope, intercept=sign * self.intercept)


def _intercept(pair: PairedSeries, slope: float) -> float:
    s = pair.summary
    return s.mean_y - slope * s.mean_x


def fit_ols(pair: PairedSeries) -> SlopeEstimate:
    """Ordinary least squares: assumes all noise sits on the predictand."""
    s = pair.summary
    if s.var_x == 0.0:
        raise DegenerateSeries("ols fit needs var_x > 0")
    slope = s.cov_xy / s.var_x
    return SlopeEstimate(slope, _intercept(pair, slope), "ols", math.inf)


def fit_inv(pair: PairedSeries) -> SlopeEstimate:
    """Inverse least squares: assumes all noise sits on the predictor."""
    s = pair.summary
    if s.cov_xy == 0.0:
        raise ZeroCovariance("inverse fit needs nonzero covariance")
    slope = s.var_y / s.cov_xy
    return SlopeEstimate(slope, _intercept(pair, slope), "inv", 0.0)


def fit_rma(pair: PairedSeries) -> SlopeEstimate:
    """Reduced major axis: slope is the ratio of standard deviations."""
    s = pair.summary
    if s.var_x == 0.0 or s.var_y == 0.0:
        raise DegenerateSeries("rma fit needs positive variances")
    slope = math.sqrt(s.var_y / s.var_x)
    return SlopeEstimate(slope, _intercept(pair, slope), "rma", s.var_y / s.var_x)


def fit_evm(pair: PairedSeries, lam: float) -> SlopeEstimate:
    """General errors-in-variables fit for a known noise ratio.

    Returns the positive root of the slope quadratic. ``lam = 0`` and
    ``lam = inf`` dispatch to the closed inverse/ols forms rather than
    evaluating the quadratic numerically.

    Raises
    ------
    NegativeLambda
        If ``lam`` is negative or NaN.
    ZeroCovariance
        If the covariance is not strictly positive (sign-normalize first).
    """
    if math.isnan(lam) or lam < 0.0:
        raise NegativeLambda(f"noise ratio must be >= 0 or +inf, got {lam}")
    s = pair.summary
    if s.cov_xy <= 0.0:
        raise ZeroCovariance("errors-in-variables fit needs cov > 0; apply sign_normalize first")
    if math.isinf(lam):
        est = fit_ols(pair)
        return SlopeEstimate(est.slope, est.intercept, "evm", math.inf)
    if lam == 0.0:
        est = fit_inv(pair)
        return SlopeEstimate(est.slope, est.intercept, "evm", 0.0)
    # Quadratic a*c^2 + b*c + k = 0 with a = cov, b = lam*var_x - var_y,
    # k = -lam*cov. Computing the larger root via the sign-aware pairing
    # avoids subtractive cancellation when lam*var_x is close to var_y.
    a = s.cov_xy
    b = lam * s.var_x - s.var_y
    disc = math.sqrt(b * b + 4.0 * lam * a * a)
    if b > 0.0:
        slope = 2.0 * lam * a / (b + disc)
    else:
        slope = (disc - b) / (2.0 * a)
    return SlopeEstimate(slope, _intercept(pair, slope), "evm", lam)


def lambda_from_slope(pair: PairedSeries, slope: float) -> float:
    """Invert the errors-in-variables fit: noise ratio that yields ``slope``.

    The slope must lie in the closed bracket ``[c_ols, c_inv]``; the
    endpoints map to ``+inf`` and ``0`` respectively.
    """
    c_ols = fit_ols(pair).slope
    c_inv = fit_inv(pair).slope
    if not c_ols <= slope <= c_inv:
        raise SlopeOutOfRange(
            f"slope {slope} outside the bracket [{c_ols}, {c_inv}]"
        )
    if slope == c_ols:
        return math.inf
    if slope == c_inv:
        return 0.0
    return (c_inv - slope) / (1.0 / c_ols - 1.0 / slope)


def predict(x: Series, est: SlopeEstimate) -> Series:
    """Elementwise affine map ``est.slope * x + est.intercept``."""
    return Series(est.slope * x.values + est.intercept)


def variance_ratio(pair: PairedSeries, slope: float) -> float:
    """Ratio of modeled to observed predictand variance, ``slope^2 var_x / var_y``.

    Equals R^2 at the ols slope, 1 at the rma slope, and 1/R^2 at the
    inverse slope.
    """
    s = pair.summary
    if s.var_y == 0.0:
        raise DegenerateSeries("variance ratio needs var_y > 0")
    return slope * slope * s.var_x / s.var_y


def sign_normalize(pair: PairedSeries) -> tuple[PairedSeries, float]:
    """Flip the predictand sign if the covariance is negative.

    Returns the (possibly flipped) pair and the sign; downstream slope and
    intercept estimates must be multiplied by the sign to refer to the
    original data.
    """
    cov = pair.summary.cov_xy
    if cov == 0.0:
        raise ZeroCovariance("cannot orient a pair with zero covariance")
    if cov > 0.0:
        return pair, 1.0
    flipped = PairedSeries(pair.x, Series(-pair.y.values))
    return flipped, -1.0


def rescale_if_steep(
    pair: PairedSeries, threshold: float = STEEP_SLOPE_THRESHOLD
) -> tuple[PairedSeries, float]:
    """Divide the predictand by the ols slope when that slope is steep.

    A steep deterministic trend would swamp the noise-driven local
    fluctuations the matching loop relies on. Returns the rescaled pair and
    the scale; the final slope estimate must be multiplied back by the scale.
    """
    c_ols = fit_ols(pair).slope
    if c_ols <= threshold:
        return pair, 1.0
    rescaled = PairedSeries(pair.x, Series(pair.y.values / c_ols))
    return rescaled, c_ols
