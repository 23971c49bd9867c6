"""Figure rendering for the report paths.

Every CLI command that writes delimited output can render a companion PNG
next to it. Figures are diagnostic, not publication-grade: explanatory-power
curves over the slope bracket, matching-loop traces, and dataset previews.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .noise_matching import SinomaResult
from .series import PairedSeries

__all__ = ["render_ep_curves", "render_trace", "render_pair"]

_SAVEFIG = dict(dpi=120, metadata={"Software": None})


def render_ep_curves(
    path: str | Path,
    rows: list[tuple[float, float, float, float]],
    q_ep: float,
    delta_ep: float,
) -> None:
    """Explanatory-power curves across the slope bracket."""
    slopes = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(slopes, [r[2] for r in rows], "-o", ms=3, label="overlap / observed band")
    ax.plot(slopes, [r[3] for r in rows], "--s", ms=3, label="overlap / modeled band")
    ax.plot(slopes, [r[1] for r in rows], ":", color="gray", label="overlap / mean band")
    ax.set_xlabel("model slope")
    ax.set_ylabel("mean explanatory power")
    ax.set_ylim(0.0, 1.05)
    ax.set_title(f"q = {q_ep:.3f}, delta = {delta_ep:+.3f}")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)


def render_trace(path: str | Path, results: list[SinomaResult]) -> None:
    """Matching-loop trace: diagnostic ratio and slope estimate per iteration."""
    fig, (ax_q, ax_c) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    for res in results:
        its = [t.iteration for t in res.trace]
        ax_q.plot(its, [t.q_ep for t in res.trace], "-o", ms=2.5, alpha=0.7,
                  label=f"replicate {res.replicate_index}")
        ax_c.plot(its, [t.c_tilde for t in res.trace], "-o", ms=2.5, alpha=0.7)
    ax_q.axhline(1.0, color="k", lw=0.8, ls="--")
    ax_q.set_ylabel("q")
    ax_c.set_ylabel("slope estimate")
    ax_c.set_xlabel("iteration")
    if len(results) <= 10:
        ax_q.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)


def render_pair(path: str | Path, pair: PairedSeries) -> None:
    """Preview of the two noisy streams over the sample index."""
    fig, ax = plt.subplots(figsize=(8, 3.5))
    idx = range(1, pair.n + 1)
    ax.plot(idx, pair.x.values, color="k", lw=0.9, label="x")
    ax.plot(idx, pair.y.values, color="0.6", lw=0.9, label="y")
    ax.set_xlabel("index")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)
