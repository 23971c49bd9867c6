"""Deterministic generators for validation datasets.

Provides the sine example pair, uniform white-noise contamination with known
variances, a first-order autoregressive surrogate standing in for a real
climate series, and pseudo-proxy suites with a prescribed noise-variance
ratio and target R^2. All draws come from named sub-streams
(:mod:`sinoma.streams`), so adding a suite member or a replicate never
perturbs earlier draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import streams
from .errors import (
    InfeasibleTarget,
    InvalidCoefficient,
    InvalidLength,
    LengthMismatch,
    NegativeVariance,
)
from .series import PairedSeries, Series, normalize_to_unit_sd

__all__ = [
    "NoiseSpec",
    "DatasetRecipe",
    "gen_sine",
    "uniform_noise",
    "contaminate",
    "gen_surrogate_climate",
    "solve_noise_for_r2",
    "pseudo_proxy_suite",
]


@dataclass(frozen=True)
class NoiseSpec:
    """White-noise variances for predictor (s2_epsilon) and predictand (s2_delta)."""

    s2_epsilon: float
    s2_delta: float

    def __post_init__(self):
        if self.s2_epsilon < 0.0 or self.s2_delta < 0.0:
            raise NegativeVariance("noise variances must be >= 0")

    @property
    def lam(self) -> float:
        """Noise-variance ratio s2_delta / s2_epsilon (+inf when s2_epsilon is 0)."""
        if self.s2_epsilon == 0.0:
            return math.inf
        return self.s2_delta / self.s2_epsilon


DEFAULT_AR_COEFFICIENT = 0.9


@dataclass(frozen=True)
class DatasetRecipe:
    """Complete description of a synthetic paired dataset."""

    signal_kind: str  # "sine" | "surrogate_ar" | "external"
    n: int
    true_slope: float
    true_intercept: float
    noise: NoiseSpec
    seed: int
    ar_coefficient: float = DEFAULT_AR_COEFFICIENT
    signal_path: str | None = None

    def __post_init__(self):
        if self.true_slope == 0.0:
            raise ValueError("true_slope must be nonzero")
        if self.signal_kind == "sine" and self.n < 16:
            raise InvalidLength("sine datasets need n >= 16")


def gen_sine(n: int, c: float, c0: float = 0.0) -> tuple[Series, Series]:
    """One complete period of a discrete sine plus its exact affine image.

    ``x_i = sin(2 pi i / n)`` for i = 1..n and ``y = c * x + c0``.
    """
    if n < 16:
        raise InvalidLength(f"need n >= 16, got {n}")
    i = np.arange(1, n + 1, dtype=float)
    x = np.sin(2.0 * np.pi * i / n)
    return Series(x), Series(c * x + c0)


def uniform_noise(variance: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Zero-mean uniform white noise with the requested population variance."""
    if variance < 0.0 or math.isnan(variance):
        raise NegativeVariance(f"variance must be >= 0, got {variance}")
    if variance == 0.0:
        return np.zeros(n)
    half_width = math.sqrt(3.0 * variance)
    return rng.uniform(-half_width, half_width, size=n)


def contaminate(
    x: Series, y: Series, noise: NoiseSpec, seed: int, *suffix_key: int
) -> PairedSeries:
    """Add independent uniform noise of the given variances to a clean pair.

    Predictor and predictand noise come from disjoint sub-streams of
    ``(seed, *suffix_key)``.
    """
    if x.n != y.n:
        raise LengthMismatch(f"series lengths differ: {x.n} vs {y.n}")
    rng_eps = streams.substream(seed, streams.ROLE_PREDICTOR_NOISE, *suffix_key)
    rng_del = streams.substream(seed, streams.ROLE_PREDICTAND_NOISE, *suffix_key)
    xp = x.values + uniform_noise(noise.s2_epsilon, x.n, rng_eps)
    yp = y.values + uniform_noise(noise.s2_delta, y.n, rng_del)
    return PairedSeries(Series(xp), Series(yp))


def gen_surrogate_climate(n: int, ar_coefficient: float, seed: int, *suffix_key: int) -> Series:
    """First-order autoregressive series, burn-in discarded, unit-sd normalized.

    Serves as a red-spectrum stand-in for an observed climate record. With
    ``ar_coefficient = 0`` the output is white and useful only as a negative
    control: the matching preconditions are expected to flag it.
    """
    if not 0.0 <= ar_coefficient < 1.0:
        raise InvalidCoefficient(f"ar coefficient must be in [0, 1), got {ar_coefficient}")
    if n < 32:
        raise InvalidLength(f"need n >= 32, got {n}")
    rng = streams.substream(seed, streams.ROLE_SURROGATE, *suffix_key)
    burn = 100
    innovations = rng.standard_normal(n + burn)
    z = np.empty(n + burn)
    z[0] = innovations[0]
    for t in range(1, n + burn):
        z[t] = ar_coefficient * z[t - 1] + innovations[t]
    return normalize_to_unit_sd(Series(z[burn:]))


def solve_noise_for_r2(signal_var: float, lam: float, target_r2: float) -> NoiseSpec:
    """Noise variances with ratio ``lam`` whose expected ols R^2 is ``target_r2``.

    For a clean pair with unit slope the expected R^2 is
    ``s^4 / ((s^2 + s2_eps)(s^2 + lam * s2_eps))`` with ``s^2`` the signal
    variance; this solves the resulting quadratic for ``s2_eps``.
    """
    if not 0.0 < target_r2 < 1.0:
        raise InfeasibleTarget(f"target R^2 must be in (0, 1), got {target_r2}")
    if lam < 0.0:
        raise NegativeVariance(f"lambda must be >= 0, got {lam}")
    s2 = signal_var
    excess = 1.0 / target_r2 - 1.0
    if lam == 0.0:
        s2_eps = s2 * excess
    else:
        disc = (1.0 + lam) ** 2 + 4.0 * lam * excess
        s2_eps = s2 * (-(1.0 + lam) + math.sqrt(disc)) / (2.0 * lam)
    if not math.isfinite(s2_eps) or s2_eps < 0.0:
        raise InfeasibleTarget(
            f"no nonnegative variance pair achieves R^2 = {target_r2} at lambda = {lam}"
        )
    return NoiseSpec(s2_epsilon=s2_eps, s2_delta=lam * s2_eps)


def pseudo_proxy_suite(
    signal: Series,
    lambdas: list[float],
    target_r2: float,
    seed: int,
) -> list[tuple[PairedSeries, NoiseSpec]]:
    """Contaminated copies of a clean signal for a list of noise ratios.

    The clean relationship is the identity (slope 1, intercept 0); for each
    ratio the noise budget is split so the expected ols R^2 equals
    ``target_r2``. Each member uses its own sub-stream.
    """
    if signal.sd() == 0.0:
        raise InfeasibleTarget("signal has zero variance")
    s2 = signal.var()
    suite = []
    for k, lam in enumerate(lambdas):
        if lam <= 0.0:
            raise NegativeVariance(f"suite noise ratios must be > 0, got {lam}")
        spec = solve_noise_for_r2(s2, lam, target_r2)
        pair = contaminate(signal, signal, spec, seed, streams.ROLE_SUITE, k)
        suite.append((pair, spec))
    return suite
