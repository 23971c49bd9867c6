"""CSV/JSON input and output.

All emitted files are byte-deterministic: floats are written with ``repr``
(shortest round-trip form), JSON objects with sorted keys, and no timestamps
or environment-dependent content anywhere.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict
from pathlib import Path

import yaml

from .errors import InvalidSeries, SinomaError
from .fluctuations import EPRecord
from .noise_matching import TraceEntry
from .series import PairedSeries, Series
from .synth import DatasetRecipe, NoiseSpec

__all__ = [
    "read_pair_csv",
    "read_signal_csv",
    "write_pair_csv",
    "write_ep_records_csv",
    "write_ep_curve_csv",
    "write_trace_csv",
    "load_recipe",
    "dump_report",
    "file_fingerprint",
]


def _fmt(value: float) -> str:
    return repr(float(value))


def file_fingerprint(path: str | Path) -> dict:
    """Path, row count (excluding header) and sha256 of the raw bytes."""
    data = Path(path).read_bytes()
    rows = data.count(b"\n")
    if data and not data.endswith(b"\n"):
        rows += 1
    return {
        "path": str(path),
        "rows": max(rows - 1, 0),
        "sha256": hashlib.sha256(data).hexdigest(),
    }


def read_pair_csv(path: str | Path) -> PairedSeries:
    """Read a paired-series CSV with header ``index,x,y`` or ``x,y``.

    The index column, when present, is ignored: row order is authoritative.
    """
    xs: list[float] = []
    ys: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InvalidSeries(f"{path}: empty file")
        cols = [c.strip().lower() for c in header]
        if cols[-2:] != ["x", "y"]:
            raise InvalidSeries(
                f"{path}: expected header ending in 'x,y', got {header!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                xs.append(float(row[-2]))
                ys.append(float(row[-1]))
            except (ValueError, IndexError) as exc:
                raise InvalidSeries(f"{path}:{lineno}: bad row {row!r}") from exc
    return PairedSeries(Series(xs), Series(ys))


def read_signal_csv(path: str | Path) -> Series:
    """Read a single signal series: the last column of a headed CSV."""
    values: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InvalidSeries(f"{path}: empty file")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                values.append(float(row[-1]))
            except ValueError as exc:
                raise InvalidSeries(f"{path}:{lineno}: bad row {row!r}") from exc
    return Series(values)


def write_pair_csv(path: str | Path, x: Series, y: Series) -> None:
    """Write ``index,x,y`` rows with 1-based indices."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "x", "y"])
        for i, (xv, yv) in enumerate(zip(x.values, y.values), start=1):
            writer.writerow([i, _fmt(xv), _fmt(yv)])


def write_ep_records_csv(path: str | Path, records: list[EPRecord]) -> None:
    """One row per joint interval with bandwidths, overlap and the three indices."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["start", "end", "bw_observed", "bw_modeled", "overlap", "ep", "ep_observed", "ep_modeled"]
        )
        for r in records:
            writer.writerow(
                [
                    r.start_index,
                    r.end_index,
                    _fmt(r.bw_observed),
                    _fmt(r.bw_modeled),
                    _fmt(r.overlap),
                    _fmt(r.ep),
                    _fmt(r.ep_observed),
                    _fmt(r.ep_modeled),
                ]
            )


def write_ep_curve_csv(path: str | Path, rows: list[tuple[float, float, float, float]]) -> None:
    """Explanatory-power curves sampled over the slope bracket."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slope", "ep", "ep_observed", "ep_modeled"])
        for slope, ep, ep_obs, ep_mod in rows:
            writer.writerow([_fmt(slope), _fmt(ep), _fmt(ep_obs), _fmt(ep_mod)])


def write_trace_csv(path: str | Path, trace: tuple[TraceEntry, ...]) -> None:
    """Per-iteration artificial variances, diagnostic ratio and slope estimate."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["iteration", "s2_epsilon_artificial", "s2_delta_artificial", "q_ep", "c_tilde"]
        )
        for t in trace:
            writer.writerow(
                [
                    t.iteration,
                    _fmt(t.s2_epsilon_artificial),
                    _fmt(t.s2_delta_artificial),
                    _fmt(t.q_ep),
                    _fmt(t.c_tilde),
                ]
            )


_RECIPE_KEYS = {
    "signal_kind",
    "n",
    "true_slope",
    "true_intercept",
    "s2_epsilon",
    "s2_delta",
    "seed",
    "ar_coefficient",
    "signal_path",
}


def load_recipe(path: str | Path) -> DatasetRecipe:
    """Parse a flat key-value recipe file (YAML mapping).

    Required keys: signal_kind, n, true_slope, true_intercept, s2_epsilon,
    s2_delta, seed. Optional: ar_coefficient (surrogate_ar), signal_path
    (external).
    """
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise SinomaError(f"{path}: recipe must be a flat key-value mapping")
    unknown = set(raw) - _RECIPE_KEYS
    if unknown:
        raise SinomaError(f"{path}: unknown recipe keys {sorted(unknown)}")
    missing = {"signal_kind", "n", "true_slope", "s2_epsilon", "s2_delta", "seed"} - set(raw)
    if missing:
        raise SinomaError(f"{path}: missing recipe keys {sorted(missing)}")
    noise = NoiseSpec(float(raw["s2_epsilon"]), float(raw["s2_delta"]))
    kwargs = dict(
        signal_kind=str(raw["signal_kind"]),
        n=int(raw["n"]),
        true_slope=float(raw["true_slope"]),
        true_intercept=float(raw.get("true_intercept", 0.0)),
        noise=noise,
        seed=int(raw["seed"]),
    )
    if "ar_coefficient" in raw:
        kwargs["ar_coefficient"] = float(raw["ar_coefficient"])
    if "signal_path" in raw:
        kwargs["signal_path"] = str(raw["signal_path"])
    return DatasetRecipe(**kwargs)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and math.isinf(obj):
        # JSON has no Infinity literal; keep reports parseable everywhere.
        return "inf" if obj > 0 else "-inf"
    if hasattr(obj, "__dataclass_fields__"):
        return _jsonable(asdict(obj))
    if hasattr(obj, "item"):  # numpy scalar
        return obj.item()
    return obj


def dump_report(report: dict) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline.

    Parsing and re-dumping the result reproduces it byte for byte.
    """
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"
