"""Iterative noise matching: the estimator core.

The endpoint explanatory powers of a sign-normalized pair,

    num = mean ep_modeled at the ols slope
    den = mean ep_observed at the inverse slope,

form the ratio ``q = num / den`` and difference ``delta = den - num``. On
data whose noise variances satisfy the variance-matching condition
(noise ratio equal to the squared rma slope), q is close to one; q > 1 says
the predictand is the noisier stream, q < 1 the predictor. Computed on a
single whole-series segment instead of the elementary fluctuations, q is
identically one for every pair.

The matching loop superimposes fresh artificial uniform noise of growing
variance on the noisier stream's complement until q crosses one, then
brackets the crossing with a shrinking multiplicative step. At the matched
point the rma slope of the modified pair estimates the true slope (with a
small correction from q), the original pair's noise ratio follows from the
slope, and the individual noise variances follow from the artificial noise
budget that was needed to reach the matched state.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import streams
from .errors import (
    DegenerateBandwidth,
    DegenerateDenominator,
    DeltaOutOfRange,
    InvalidSlopeInputs,
    NonPhysicalNoise,
    TooFewFluctuations,
    ZeroCovariance,
)
from .fluctuations import (
    MIN_FLUCTUATIONS,
    ep_records,
    ep_summary,
    interior_extrema,
    joint_partition,
    segment,
    whole_series_partition,
)
from .regression import (
    fit_inv,
    fit_ols,
    fit_rma,
    lambda_from_slope,
    predict,
    rescale_if_steep,
    sign_normalize,
)
from .series import PairedSeries, Series
from .synth import uniform_noise

__all__ = [
    "QEPDiagnostic",
    "SinomaConfig",
    "TraceEntry",
    "SinomaResult",
    "ReplicateSummary",
    "q_ep",
    "slope_from_q",
    "slope_from_delta",
    "lambda_from_q",
    "add_artificial_noise",
    "recover_noise",
    "noiseless_sds",
    "whiteness_hazard",
    "run_sinoma",
    "run_replicates",
]


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QEPDiagnostic:
    """Endpoint explanatory powers and the derived deviation indicators.

    ``slope_grid`` (grid mode only) holds (slope, ep, ep_observed,
    ep_modeled) samples across the slope bracket.
    """

    q_ep: float
    delta_ep: float
    ep_modeled_at_ols: float
    ep_observed_at_inv: float
    slope_grid: tuple[tuple[float, float, float, float], ...] | None = None


def _ep_means(observed: Series, modeled: Series, obs_partition, boundary_kind, min_fluctuations):
    if obs_partition.boundary_kind == "whole":
        mod_partition = whole_series_partition(modeled)
    else:
        mod_partition = segment(modeled, boundary_kind, min_fluctuations)
    records = ep_records(joint_partition(obs_partition, mod_partition))
    return ep_summary(records)


def q_ep(
    pair: PairedSeries,
    mode: str = "endpoints",
    grid_points: int = 21,
    boundary_kind: str = "maxima",
    min_fluctuations: int = MIN_FLUCTUATIONS,
    whole_series: bool = False,
) -> QEPDiagnostic:
    """Deviation-from-variance-matching diagnostic of a sign-normalized pair.

    Predictions are built at the ols and inverse slopes with the standard
    mean-preserving intercept. In ``endpoints`` mode the numerator and
    denominator are read off at those two slopes; in ``grid_max`` mode they
    are the maxima of the respective explanatory-power curves over a uniform
    slope grid spanning the bracket. ``whole_series=True`` replaces the
    fluctuation partitions with a single whole-series segment, for which the
    result is identically one.
    """
    if pair.summary.cov_xy <= 0.0:
        raise ZeroCovariance("diagnostic needs cov > 0; apply sign_normalize first")
    if mode not in ("endpoints", "grid_max"):
        raise ValueError(f"mode must be 'endpoints' or 'grid_max', got {mode!r}")
    est_ols = fit_ols(pair)
    est_inv = fit_inv(pair)
    if whole_series:
        obs_partition = whole_series_partition(pair.y)
    else:
        obs_partition = segment(pair.y, boundary_kind, min_fluctuations)
    if all(f.bandwidth == 0.0 for f in obs_partition.fluctuations):
        raise DegenerateBandwidth("observed series has zero bandwidth everywhere")

    grid: tuple[tuple[float, float, float, float], ...] | None = None
    if mode == "endpoints":
        s_ols = _ep_means(pair.y, predict(pair.x, est_ols), obs_partition, boundary_kind, min_fluctuations)
        s_inv = _ep_means(pair.y, predict(pair.x, est_inv), obs_partition, boundary_kind, min_fluctuations)
        num = s_ols.ep_modeled_mean
        den = s_inv.ep_observed_mean
    else:
        slopes = np.linspace(est_ols.slope, est_inv.slope, grid_points)
        rows = []
        for c in slopes:
            pred = Series(c * pair.x.values + (pair.summary.mean_y - c * pair.summary.mean_x))
            s = _ep_means(pair.y, pred, obs_partition, boundary_kind, min_fluctuations)
            rows.append((float(c), s.ep_mean, s.ep_observed_mean, s.ep_modeled_mean))
        grid = tuple(rows)
        num = max(r[3] for r in rows)
        den = max(r[2] for r in rows)

    if den == 0.0 and num == 0.0:
        raise DegenerateBandwidth("both endpoint explanatory powers are zero")
    q = math.inf if den == 0.0 else num / den
    return QEPDiagnostic(
        q_ep=q,
        delta_ep=den - num,
        ep_modeled_at_ols=num,
        ep_observed_at_inv=den,
        slope_grid=grid,
    )


def slope_from_q(q: float, c_rma: float, c_inv: float) -> float:
    """Slope estimate from the endpoint ratio q and the two upper bracket slopes.

    Algebraically this is the errors-in-variables slope at the noise ratio
    implied by q (``c_rma**2 * q**2``), expressed through the bracket slopes:
    q = 1 gives the rma slope, q = 0 the inverse slope, and q -> inf tends to
    ``c_rma**2 / c_inv`` (the ols slope when the inputs come from one pair).
    """
    if math.isnan(q) or q < 0.0 or not 0.0 < c_rma <= c_inv:
        raise InvalidSlopeInputs(
            f"need q >= 0 and 0 < c_rma <= c_inv, got q={q}, c_rma={c_rma}, c_inv={c_inv}"
        )
    if q == 1.0:
        return c_rma
    if q == 0.0:
        return c_inv
    if math.isinf(q):
        return c_rma * c_rma / c_inv
    half = 0.5 * c_inv * (1.0 - q * q)
    disc = math.sqrt(c_rma * c_rma * q * q + half * half)
    if half >= 0.0:
        return half + disc
    # q > 1: evaluate via the root product to avoid cancellation.
    return c_rma * c_rma * q * q / (disc - half)


def slope_from_delta(
    delta: float,
    c_ols: float,
    c_rma: float,
    c_inv: float,
    verbatim: bool = False,
) -> float:
    """Linear interpolation of the slope from the endpoint difference.

    For delta >= 0 the estimate moves from the rma slope toward the inverse
    slope. For delta < 0 the default moves it toward the ols slope
    (``c_rma + (c_rma - c_ols) * delta``); ``verbatim=True`` selects the
    sign-flipped lower branch ``c_rma + (c_ols - c_rma) * delta``, which
    moves the estimate the other way and is kept only for comparison.
    """
    if not -1.0 < delta < 1.0:
        raise DeltaOutOfRange(f"delta must lie in (-1, 1), got {delta}")
    if not c_ols <= c_rma <= c_inv:
        raise InvalidSlopeInputs(f"need c_ols <= c_rma <= c_inv, got {c_ols}, {c_rma}, {c_inv}")
    if delta >= 0.0:
        return c_rma + (c_inv - c_rma) * delta
    if verbatim:
        return c_rma + (c_ols - c_rma) * delta
    return c_rma + (c_rma - c_ols) * delta


def lambda_from_q(q: float, c_rma: float) -> float:
    """Noise-ratio estimate implied by the endpoint ratio: ``c_rma**2 * q**2``."""
    return c_rma * c_rma * q * q


def add_artificial_noise(series: Series, variance: float, rng: np.random.Generator) -> Series:
    """Superimpose zero-mean uniform white noise of the given population variance."""
    if variance == 0.0:
        return series
    return Series(series.values + uniform_noise(variance, series.n, rng))


def recover_noise(
    lambda_evm: float,
    lambda_rma_pp: float,
    s2_eps_art: float,
    s2_del_art: float,
) -> tuple[float, float]:
    """Original noise variances from the matched state.

    At the matched point the modified pair satisfies the variance-matching
    condition, so its noise ratio ``lambda_rma_pp`` relates the original
    noise variances to the artificial budget:

        s2_eps = (s2_del_art - lambda_rma_pp * s2_eps_art) / (lambda_rma_pp - lambda_evm)
        s2_del = lambda_evm * s2_eps

    Raises
    ------
    DegenerateDenominator
        If the two ratios are non-finite or equal to within 1e-12.
    NonPhysicalNoise
        If either recovered variance is negative.
    """
    if not (math.isfinite(lambda_evm) and math.isfinite(lambda_rma_pp)):
        raise DegenerateDenominator("noise recovery needs finite lambda values")
    if abs(lambda_rma_pp - lambda_evm) < 1e-12:
        raise DegenerateDenominator(
            f"matched and original noise ratios coincide ({lambda_rma_pp} vs {lambda_evm})"
        )
    s2_eps = (s2_del_art - lambda_rma_pp * s2_eps_art) / (lambda_rma_pp - lambda_evm)
    s2_del = lambda_evm * s2_eps
    if s2_eps < 0.0 or s2_del < 0.0:
        raise NonPhysicalNoise(
            f"recovered variances are negative: s2_eps={s2_eps}, s2_del={s2_del}"
        )
    return s2_eps, s2_del


def noiseless_sds(pair: PairedSeries, s2_epsilon: float, s2_delta: float) -> tuple[float, float]:
    """Standard deviations of the noise-free variables (observed minus noise)."""
    s = pair.summary
    if not (0.0 <= s2_epsilon < s.var_x and 0.0 <= s2_delta < s.var_y):
        raise NonPhysicalNoise(
            "noise variances must be nonnegative and strictly below the observed variances"
        )
    return math.sqrt(s.var_x - s2_epsilon), math.sqrt(s.var_y - s2_delta)


# ---------------------------------------------------------------------------
# White-signal hazard guard
# ---------------------------------------------------------------------------

# Strict-maxima count of an iid series of length N: mean (N-2)/3 and variance
# close to (2(N-2)+8)/45 (checked against simulation). Counts within
# WHITENESS_Z standard deviations below the mean on BOTH streams mean the
# serial structure visible to the segmentation cannot be told apart from
# white noise; if the underlying signal itself is white, the estimator's core
# assumption fails.
WHITENESS_Z = 1.5


def whiteness_hazard(pair: PairedSeries) -> bool:
    """True when both streams' fluctuation counts look white.

    A count heuristic, not a spectral test: heavily contaminated but valid
    pairs can trip it (reported as a warning, never an error).
    """
    for series in (pair.x, pair.y):
        n = series.n
        count = len(interior_extrema(series.values, "maxima"))
        mean = (n - 2) / 3.0
        sd = math.sqrt((2.0 * (n - 2) + 8.0) / 45.0)
        if count < mean - WHITENESS_Z * sd:
            return False
    return True


# ---------------------------------------------------------------------------
# The matching loop
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SinomaConfig:
    """Tuning knobs for the matching loop.

    ``tiny_noise_variance`` and ``initial_noise_variance`` default to
    1e-4 and 0.25 of the variance of the series they are applied to;
    explicit values are taken as absolute variances.
    """

    seed: int = 0
    max_iterations: int = 50
    q_tolerance: float = 0.01
    slope_tolerance: float = 0.01
    noise_growth_factor: float = 2.0
    bracket_shrink_factor: float = 0.5
    tiny_noise_variance: float | None = None
    initial_noise_variance: float | None = None
    replicates: int = 10
    ep_eval_mode: str = "endpoints"
    grid_points: int = 21
    boundary_kind: str = "maxima"

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.q_tolerance <= 0.0 or self.slope_tolerance <= 0.0:
            raise ValueError("tolerances must be > 0")
        if self.noise_growth_factor <= 1.0:
            raise ValueError("noise_growth_factor must be > 1")
        if not 0.0 < self.bracket_shrink_factor < 1.0:
            raise ValueError("bracket_shrink_factor must be in (0, 1)")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.ep_eval_mode not in ("endpoints", "grid_max"):
            raise ValueError("ep_eval_mode must be 'endpoints' or 'grid_max'")
        if self.grid_points < 2:
            raise ValueError("grid_points must be >= 2")


@dataclass(frozen=True)
class TraceEntry:
    """One matching iteration: artificial variances, diagnostic, slope estimate.

    Values refer to the loop's working frame (sign-normalized, possibly
    rescaled); ``lambda_rma_pp`` is the modified pair's variance ratio.
    """

    iteration: int
    s2_epsilon_artificial: float
    s2_delta_artificial: float
    q_ep: float
    c_tilde: float
    lambda_rma_pp: float


@dataclass(frozen=True)
class SinomaResult:
    """Final estimates in the frame of the original input pair."""

    slope: float
    intercept: float
    lambda_evm: float
    s2_epsilon: float
    s2_delta: float
    s2_epsilon_artificial: float
    s2_delta_artificial: float
    sd_x_noiseless: float
    sd_y_noiseless: float
    lambda_rma_pp: float
    iterations_used: int
    converged: bool
    sign: float
    scale: float
    seed: int
    replicate_index: int
    trace: tuple[TraceEntry, ...]
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def q_ep_first(self) -> float:
        """Diagnostic of the first pass (before any strong artificial noise)."""
        return self.trace[0].q_ep


_TINY_FRACTION = 1e-4
_INITIAL_FRACTION = 0.25
_MAX_TINY_DOUBLINGS = 10
_MAX_REDRAWS = 3


def _boundary_count(values, kind):
    # interior extrema surviving the edge rule of segment()
    n = len(values)
    return sum(1 for i in interior_extrema(values, kind) if 2 <= i <= n - 3)


def _noise_driven_count(n: int) -> int:
    """Boundary count above which the segmentation counts as noise-driven.

    Half the expected count of an iid series, floored at the minimum
    fluctuation requirement. The local extrema must come mainly from the
    noise, not from a smooth deterministic trend, for the local bandwidths
    to represent noise intensities.
    """
    return max(MIN_FLUCTUATIONS - 1, math.ceil((n - 2) / 6.0))


def run_sinoma(pair: PairedSeries, config: SinomaConfig, replicate_index: int = 0) -> SinomaResult:
    """One full matching run on a pair.

    Sign normalization and steep-slope rescaling are applied internally and
    undone in the reported result, so the input may be passed as measured.
    Identical (pair, config, replicate_index) triples give bit-identical
    results including the trace.
    """
    warnings: list[str] = []
    oriented, sign = sign_normalize(pair)
    if sign < 0:
        warnings.append("negative covariance: predictand sign flipped for the fit")
    working, scale = rescale_if_steep(oriented)
    if scale != 1.0:
        warnings.append(f"steep ols slope: predictand divided by {scale:.6g} during matching")
    if whiteness_hazard(working):
        warnings.append(
            "whiteness hazard: fluctuation counts of both streams are consistent with "
            "white noise; results are unreliable if the underlying signal is white"
        )

    rng_x = streams.substream(config.seed, streams.ROLE_MATCH_PREDICTOR, replicate_index)
    rng_y = streams.substream(config.seed, streams.ROLE_MATCH_PREDICTAND, replicate_index)

    var_x = working.summary.var_x
    var_y = working.summary.var_y
    if config.tiny_noise_variance is None:
        tiny_x = _TINY_FRACTION * var_x
        tiny_y = _TINY_FRACTION * var_y
    else:
        tiny_x = tiny_y = config.tiny_noise_variance

    kind = config.boundary_kind

    def modified(art_x: float, art_y: float) -> PairedSeries:
        xs = Series(working.x.values + uniform_noise(art_x, working.n, rng_x))
        ys = Series(working.y.values + uniform_noise(art_y, working.n, rng_y))
        return PairedSeries(xs, ys)

    # Warm-up: tiny noise on both streams. Each stream's tiny variance is
    # doubled until its fluctuation count indicates noise-driven
    # segmentation (a smooth, nearly noiseless stream segments into a few
    # huge trend-dominated pieces whose bandwidths say nothing about noise).
    needed = _noise_driven_count(working.n)
    current = None
    doublings = 0
    for _ in range(_MAX_TINY_DOUBLINGS + 1):
        candidate = modified(tiny_x, tiny_y)
        ok_x = _boundary_count(candidate.x.values, kind) >= needed
        ok_y = _boundary_count(candidate.y.values, kind) >= needed
        if ok_x and ok_y and candidate.summary.cov_xy > 0.0:
            current = candidate
            break
        if not ok_x:
            tiny_x *= 2.0
        if not ok_y:
            tiny_y *= 2.0
        doublings += 1
    if current is None:
        raise TooFewFluctuations(
            "tiny-noise warm-up could not make the segmentation noise-driven"
        )
    if doublings > 0:
        warnings.append(
            f"tiny noise escalated over {doublings} attempt(s) to reach noise-driven segmentation"
        )

    target: str | None = None
    undershoot: float = 0.0
    art = math.nan
    log_step = math.log(config.noise_growth_factor)
    prev_side = 0.0
    crossings = 0
    trace: list[TraceEntry] = []
    converged = False
    art_x, art_y = tiny_x, tiny_y

    # The matched state satisfies lam'' = c~^2 with c~ inside the original
    # slope bracket, so lam'' outside the squared bracket (with margin)
    # proves over/undershoot no matter what the jittery diagnostic says.
    # Without this bound an unlucky run can grow the artificial variance
    # without limit.
    c_ols_w = fit_ols(working).slope
    c_inv_w = fit_inv(working).slope
    lam_window = (0.5 * c_ols_w * c_ols_w, 2.0 * c_inv_w * c_inv_w)

    for iteration in range(1, config.max_iterations + 1):
        if iteration > 1:
            art_x = art if target == "x" else tiny_x
            art_y = art if target == "y" else tiny_y
            # Mid-loop draws only need the hard minimum; the escalated tiny
            # variances keep the counts far above it in practice.
            floor = MIN_FLUCTUATIONS - 1
            current = modified(art_x, art_y)
            for _ in range(_MAX_REDRAWS):
                if (
                    _boundary_count(current.x.values, kind) >= floor
                    and _boundary_count(current.y.values, kind) >= floor
                    and current.summary.cov_xy > 0.0
                ):
                    break
                current = modified(art_x, art_y)
            else:
                raise TooFewFluctuations(
                    f"iteration {iteration}: modified pair repeatedly failed preconditions"
                )

        diag = q_ep(
            current,
            mode=config.ep_eval_mode,
            grid_points=config.grid_points,
            boundary_kind=kind,
        )
        q = diag.q_ep
        c_rma_pp = fit_rma(current).slope
        c_inv_pp = fit_inv(current).slope
        # c_rma <= c_inv holds mathematically; guard the few-ulp violations
        # that near-collinear warm-up pairs can produce.
        c_tilde = slope_from_q(q, min(c_rma_pp, c_inv_pp), c_inv_pp)
        lam_pp = current.summary.var_y / current.summary.var_x
        trace.append(
            TraceEntry(
                iteration=iteration,
                s2_epsilon_artificial=art_x,
                s2_delta_artificial=art_y,
                q_ep=q,
                c_tilde=c_tilde,
                lambda_rma_pp=lam_pp,
            )
        )

        in_window = lam_window[0] <= lam_pp <= lam_window[1]
        # The ratio tolerance may stop the loop anywhere (it covers data that
        # already sit at the matched state); the slope tolerance compares the
        # preliminary estimate recorded at a sign change, so it can only fire
        # once the crossing has actually been bracketed.
        if in_window and abs(q - 1.0) < config.q_tolerance:
            converged = True
            break

        if target is None:
            # First informative pass fixes which stream receives strong noise.
            target = "x" if q > 1.0 else "y"
            undershoot = math.copysign(1.0, q - 1.0)
            prev_side = undershoot
            if config.initial_noise_variance is not None:
                art = config.initial_noise_variance
            else:
                art = _INITIAL_FRACTION * (var_x if target == "x" else var_y)
            continue

        side = math.copysign(1.0, q - 1.0)
        # Feasibility override: noise on y pushes lam'' up, noise on x pushes
        # it down; past the window edge the direction is certain.
        if target == "y" and lam_pp > lam_window[1]:
            side = -undershoot
        elif target == "x" and lam_pp < lam_window[0]:
            side = -undershoot
        if side != prev_side:
            crossings += 1
            log_step *= config.bracket_shrink_factor
            prev_side = side
            # A single fresh-noise draw can fake the crossing; demand a
            # refined bracket (back-and-forth) before the slope criterion
            # may end the run.
            if (
                crossings >= 2
                and in_window
                and abs(c_tilde - c_rma_pp) < config.slope_tolerance
            ):
                converged = True
                break
        art *= math.exp(log_step if side == undershoot else -log_step)

    # Pick the matched state: the stopping entry when converged, otherwise
    # the best-bracketed one (smallest |q - 1| among feasible states, latest
    # on ties).
    if converged:
        final = trace[-1]
    else:
        pool = [e for e in trace if lam_window[0] <= e.lambda_rma_pp <= lam_window[1]]
        if not pool:
            pool = list(trace)
        final = pool[0]
        for entry in pool:
            if abs(entry.q_ep - 1.0) <= abs(final.q_ep - 1.0):
                final = entry
        warnings.append(
            f"no convergence within {config.max_iterations} iterations; "
            "reporting the best bracketed estimate"
        )

    # Convert back: working frame -> oriented frame -> original frame.
    slope_oriented = final.c_tilde * scale
    slope = sign * slope_oriented
    intercept = pair.summary.mean_y - slope * pair.summary.mean_x

    c_ols_1 = fit_ols(oriented).slope
    c_inv_1 = fit_inv(oriented).slope
    slope_for_lambda = slope_oriented
    if not c_ols_1 <= slope_for_lambda <= c_inv_1:
        slope_for_lambda = min(max(slope_for_lambda, c_ols_1), c_inv_1)
        warnings.append(
            "matched slope fell outside the feasible bracket of the original pair; "
            "noise-ratio recovery uses the clamped value"
        )
    lam_evm = lambda_from_slope(oriented, slope_for_lambda)

    lam_rma_pp = final.lambda_rma_pp * scale * scale
    art_eps = final.s2_epsilon_artificial
    art_del = final.s2_delta_artificial * scale * scale

    non_physical = False
    if math.isinf(lam_evm):
        s2_eps = 0.0
        s2_del = lam_rma_pp * art_eps - art_del
        if s2_del < 0.0:
            s2_del = 0.0
            non_physical = True
    else:
        try:
            s2_eps, s2_del = recover_noise(lam_evm, lam_rma_pp, art_eps, art_del)
        except DegenerateDenominator:
            warnings.append(
                "matched and original noise ratios coincide; noise variances unidentifiable"
            )
            s2_eps = s2_del = math.nan
        except NonPhysicalNoise:
            s2_eps = (art_del - lam_rma_pp * art_eps) / (lam_rma_pp - lam_evm)
            s2_del = lam_evm * s2_eps
            s2_eps = max(s2_eps, 0.0)
            s2_del = max(s2_del, 0.0)
            non_physical = True

    obs_var_x = pair.summary.var_x
    obs_var_y = pair.summary.var_y
    if not math.isnan(s2_eps):
        if s2_eps > obs_var_x or s2_del > obs_var_y:
            non_physical = True
        sd_x = math.sqrt(max(obs_var_x - s2_eps, 0.0))
        sd_y = math.sqrt(max(obs_var_y - s2_del, 0.0))
    else:
        sd_x = sd_y = math.nan
    if non_physical:
        warnings.append("non-physical noise recovery: a variance was clamped into range")

    return SinomaResult(
        slope=slope,
        intercept=intercept,
        lambda_evm=lam_evm,
        s2_epsilon=s2_eps,
        s2_delta=s2_del,
        s2_epsilon_artificial=art_eps,
        s2_delta_artificial=art_del,
        sd_x_noiseless=sd_x,
        sd_y_noiseless=sd_y,
        lambda_rma_pp=lam_rma_pp,
        iterations_used=len(trace),
        converged=converged,
        sign=sign,
        scale=scale,
        seed=config.seed,
        replicate_index=replicate_index,
        trace=tuple(trace),
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class ReplicateSummary:
    """Mean and sample standard deviation of the headline estimates over replicates."""

    results: tuple[SinomaResult, ...]
    slope_mean: float
    slope_sd: float
    lambda_evm_mean: float
    lambda_evm_sd: float
    s2_epsilon_mean: float
    s2_delta_mean: float
    sd_x_noiseless_mean: float
    sd_y_noiseless_mean: float
    converged_count: int

    @property
    def replicates(self) -> int:
        return len(self.results)


def _sample_sd(values: list[float]) -> float:
    if len(values) < 2:
        return 0.0
    arr = np.asarray(values)
    if not np.all(np.isfinite(arr)):
        return math.nan
    return float(np.std(arr, ddof=1))


def run_replicates(
    pair: PairedSeries, config: SinomaConfig, threads: int = 1
) -> ReplicateSummary:
    """Run the matching loop ``config.replicates`` times on independent streams.

    Replicate k draws its artificial noise from sub-stream (seed, role, k),
    so results are independent of execution order and thread count.
    """
    indices = range(config.replicates)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda k: run_sinoma(pair, config, k), indices))
    else:
        results = [run_sinoma(pair, config, k) for k in indices]
    slopes = [r.slope for r in results]
    lams = [r.lambda_evm for r in results]
    return ReplicateSummary(
        results=tuple(results),
        slope_mean=float(np.mean(slopes)),
        slope_sd=_sample_sd(slopes),
        lambda_evm_mean=float(np.mean(lams)),
        lambda_evm_sd=_sample_sd(lams),
        s2_epsilon_mean=float(np.mean([r.s2_epsilon for r in results])),
        s2_delta_mean=float(np.mean([r.s2_delta for r in results])),
        sd_x_noiseless_mean=float(np.mean([r.sd_x_noiseless for r in results])),
        sd_y_noiseless_mean=float(np.mean([r.sd_y_noiseless for r in results])),
        converged_count=sum(1 for r in results if r.converged),
    )
