"""Elementary-fluctuation segmentation and explanatory-power indices.

A series is split into "elementary fluctuations": segments running from one
strict local maximum to the next (or minimum to minimum). Boundary extrema
belong to both neighboring segments, and every segment has at least three
points. Each fluctuation s gets a local mean, a local population standard
deviation, and a bandwidth ``A_s = 2 * sd`` defining the interval
``I_s = [mean - sd, mean + sd]``.

Two series are compared on the joint partition: the union of both boundary
sets. On each joint interval the parent fluctuations' intervals (not
statistics recomputed on the sub-interval) are intersected, and the overlap
length ``O_s`` is normalized three ways:

    ep          = O_s / ((A_obs + A_mod) / 2)   symmetric index
    ep_observed = O_s / A_obs                    share of the observed band
    ep_modeled  = O_s / A_mod                    share of the modeled band

All three lie in [0, 1]. Their unweighted means over the joint intervals are
the overall explanatory powers; the noise-matching diagnostics are built from
the means of ep_modeled and ep_observed at the two bracketing slopes.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBandwidth, LengthMismatch, RangeMismatch, TooFewFluctuations
from .series import Series

__all__ = [
    "Fluctuation",
    "FluctuationPartition",
    "JointInterval",
    "JointPartition",
    "EPRecord",
    "EPSummary",
    "MIN_FLUCTUATIONS",
    "interior_extrema",
    "segment",
    "whole_series_partition",
    "joint_partition",
    "overlap",
    "ep_records",
    "ep_summary",
    "explanatory_powers",
]

# Minimum number of elementary fluctuations for a reliable comparison.
MIN_FLUCTUATIONS = 6


@dataclass(frozen=True)
class Fluctuation:
    """One elementary fluctuation: inclusive index range plus local statistics."""

    start_index: int
    end_index: int
    local_mean: float
    local_sd: float

    @property
    def n_points(self) -> int:
        return self.end_index - self.start_index + 1

    @property
    def bandwidth(self) -> float:
        return 2.0 * self.local_sd

    @property
    def interval(self) -> tuple[float, float]:
        return (self.local_mean - self.local_sd, self.local_mean + self.local_sd)


@dataclass(frozen=True)
class FluctuationPartition:
    """Ordered fluctuations covering indices 0..n-1 with shared boundaries."""

    fluctuations: tuple[Fluctuation, ...]
    boundary_kind: str  # "maxima" | "minima" | "whole"
    n: int

    def __len__(self) -> int:
        return len(self.fluctuations)

    @property
    def edges(self) -> list[int]:
        """All segment edges including 0 and n-1."""
        return [f.start_index for f in self.fluctuations] + [self.n - 1]


@dataclass(frozen=True)
class JointInterval:
    start_index: int
    end_index: int
    parent_a: Fluctuation
    parent_b: Fluctuation


@dataclass(frozen=True)
class JointPartition:
    intervals: tuple[JointInterval, ...]

    @property
    def m(self) -> int:
        return len(self.intervals)


def interior_extrema(values: np.ndarray, kind: str = "maxima") -> list[int]:
    """Indices of strict interior local extrema, with the plateau rule.

    A run of equal values counts as a single extremum when both neighbors of
    the run lie strictly below (maxima) or above (minima); the run's first
    index is reported. Series endpoints are never extrema.
    """
    if kind not in ("maxima", "minima"):
        raise ValueError(f"kind must be 'maxima' or 'minima', got {kind!r}")
    n = len(values)
    out: list[int] = []
    i = 1
    while i < n - 1:
        j = i
        while j + 1 < n and values[j + 1] == values[i]:
            j += 1
        if j < n - 1:  # run fully interior on the right
            left, right = values[i - 1], values[j + 1]
            if kind == "maxima":
                if left < values[i] and right < values[i]:
                    out.append(i)
            else:
                if left > values[i] and right > values[i]:
                    out.append(i)
        i = j + 1
    return out


def _fluctuation(values: np.ndarray, start: int, end: int) -> Fluctuation:
    seg = values[start : end + 1]
    mean = float(np.mean(seg))
    sd = float(np.sqrt(np.mean((seg - mean) ** 2)))
    return Fluctuation(start, end, mean, sd)


def segment(
    series: Series,
    boundary_kind: str = "maxima",
    min_fluctuations: int = MIN_FLUCTUATIONS,
) -> FluctuationPartition:
    """Partition a series into elementary fluctuations.

    Boundaries sit at every strict interior extremum of ``boundary_kind``.
    The series start and end act as implicit boundaries; a leading or
    trailing fragment shorter than three points is merged into its neighbor.

    Raises
    ------
    TooFewFluctuations
        If fewer than ``min_fluctuations`` segments result.
    """
    values = series.values
    n = len(values)
    boundaries = interior_extrema(values, boundary_kind)
    # Edge fragments need >= 3 points: first boundary at index >= 2, last at <= n-3.
    while boundaries and boundaries[0] < 2:
        boundaries.pop(0)
    while boundaries and boundaries[-1] > n - 3:
        boundaries.pop()
    edges = [0] + boundaries + [n - 1]
    flucts = tuple(
        _fluctuation(values, edges[k], edges[k + 1]) for k in range(len(edges) - 1)
    )
    if len(flucts) < min_fluctuations:
        raise TooFewFluctuations(
            f"segmentation produced {len(flucts)} fluctuation(s), "
            f"need at least {min_fluctuations}"
        )
    return FluctuationPartition(flucts, boundary_kind, n)


def whole_series_partition(series: Series) -> FluctuationPartition:
    """Treat the entire series as a single segment (diagnostic identity mode)."""
    f = _fluctuation(series.values, 0, series.n - 1)
    return FluctuationPartition((f,), "whole", series.n)


def joint_partition(pa: FluctuationPartition, pb: FluctuationPartition) -> JointPartition:
    """Intersect two partitions of the same index range.

    The sorted union of both boundary sets defines the joint intervals; each
    interval references the unique parent fluctuation containing it in each
    series.
    """
    if pa.n != pb.n:
        raise RangeMismatch(f"partitions cover different ranges: {pa.n} vs {pb.n}")
    edges = sorted(set(pa.edges) | set(pb.edges))
    starts_a = [f.start_index for f in pa.fluctuations]
    starts_b = [f.start_index for f in pb.fluctuations]

    def parent(partition, starts, lo, hi):
        i = bisect_right(starts, lo) - 1
        f = partition.fluctuations[i]
        if not (f.start_index <= lo and hi <= f.end_index):
            raise RangeMismatch(
                f"joint interval [{lo}, {hi}] not contained in a single fluctuation"
            )
        return f

    intervals = tuple(
        JointInterval(
            lo,
            hi,
            parent(pa, starts_a, lo, hi),
            parent(pb, starts_b, lo, hi),
        )
        for lo, hi in zip(edges[:-1], edges[1:])
    )
    return JointPartition(intervals)


def overlap(interval_a: tuple[float, float], interval_b: tuple[float, float]) -> float:
    """Length of the intersection of two closed intervals (0 if disjoint)."""
    lo_a, hi_a = interval_a
    lo_b, hi_b = interval_b
    return max(min(hi_a, hi_b) - max(lo_a, lo_b), 0.0)


@dataclass(frozen=True)
class EPRecord:
    """Per-joint-interval overlap and explanatory-power indices.

    ``bw_observed``/``bw_modeled`` are the parent bandwidths; ``degenerate``
    marks a zero denominator (the affected indices are defined as 0).
    """

    start_index: int
    end_index: int
    bw_observed: float
    bw_modeled: float
    overlap: float
    ep: float
    ep_observed: float
    ep_modeled: float
    degenerate: bool


@dataclass(frozen=True)
class EPSummary:
    """Arithmetic means of the indices over the joint intervals."""

    ep_mean: float
    ep_observed_mean: float
    ep_modeled_mean: float
    m: int


def _safe_ratio(num: float, den: float) -> float:
    # Interval arithmetic can land a few ulp above 1; the indices are
    # bounded by construction, so clamp.
    if den == 0.0:
        return 0.0
    return min(num / den, 1.0)


def ep_records(joint: JointPartition) -> list[EPRecord]:
    """Explanatory-power indices for every joint interval, in index order."""
    records = []
    for iv in joint.intervals:
        a_obs = iv.parent_a.bandwidth
        a_mod = iv.parent_b.bandwidth
        o = overlap(iv.parent_a.interval, iv.parent_b.interval)
        records.append(
            EPRecord(
                start_index=iv.start_index,
                end_index=iv.end_index,
                bw_observed=a_obs,
                bw_modeled=a_mod,
                overlap=o,
                ep=_safe_ratio(o, 0.5 * (a_obs + a_mod)),
                ep_observed=_safe_ratio(o, a_obs),
                ep_modeled=_safe_ratio(o, a_mod),
                degenerate=(a_obs == 0.0 or a_mod == 0.0),
            )
        )
    return records


def ep_summary(records: list[EPRecord], length_weighted: bool = False) -> EPSummary:
    """Average the indices over all joint intervals.

    The default is the unweighted arithmetic mean; ``length_weighted=True``
    weights each interval by its point count (experimental alternative).
    Accumulation runs in index order so results are bit-reproducible.
    """
    if not records:
        raise TooFewFluctuations("no joint intervals to average")
    s_ep = s_obs = s_mod = s_w = 0.0
    for r in records:
        w = float(r.end_index - r.start_index + 1) if length_weighted else 1.0
        s_ep += w * r.ep
        s_obs += w * r.ep_observed
        s_mod += w * r.ep_modeled
        s_w += w
    return EPSummary(s_ep / s_w, s_obs / s_w, s_mod / s_w, len(records))


def explanatory_powers(
    observed: Series,
    modeled: Series,
    boundary_kind: str = "maxima",
    min_fluctuations: int = MIN_FLUCTUATIONS,
    length_weighted: bool = False,
    observed_partition: FluctuationPartition | None = None,
) -> tuple[list[EPRecord], EPSummary]:
    """Segment both series and compare them on the joint partition.

    ``observed_partition`` may be supplied to reuse a previously computed
    segmentation of the observed series (it does not depend on the model).

    Raises
    ------
    TooFewFluctuations
        If either series yields fewer than ``min_fluctuations`` segments.
    DegenerateBandwidth
        If every local bandwidth of one of the series is zero.
    """
    if observed.n != modeled.n:
        raise LengthMismatch(f"series lengths differ: {observed.n} vs {modeled.n}")
    p_obs = observed_partition
    if p_obs is None:
        p_obs = segment(observed, boundary_kind, min_fluctuations)
    p_mod = segment(modeled, boundary_kind, min_fluctuations)
    for name, part in (("observed", p_obs), ("modeled", p_mod)):
        if all(f.bandwidth == 0.0 for f in part.fluctuations):
            raise DegenerateBandwidth(f"every local bandwidth of the {name} series is zero")
    records = ep_records(joint_partition(p_obs, p_mod))
    return records, ep_summary(records, length_weighted)
