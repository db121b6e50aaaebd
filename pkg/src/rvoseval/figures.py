"""Matplotlib figure rendering for stats and evaluation reports.

Figures are written as PNG files next to the delimited output; nothing
here feeds back into the metrics.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .dataset import Statistics  # noqa: E402
from .report import METRIC_KEYS, EvalReport  # noqa: E402


def _save(fig, outdir: Path, name: str, written: list[Path]) -> None:
    path = outdir / name
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(path)


def _hist_figure(hist: dict, title: str, xlabel: str):
    width = hist["bin_width_s"]
    counts = hist["counts"]
    edges = [i * width for i in range(len(counts))]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(edges, counts, width=width * 0.9, align="edge", color="#4878cf")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    return fig


def _count_figure(counts: dict[int, int], title: str, xlabel: str):
    keys = sorted(counts)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar([str(k) for k in keys], [counts[k] for k in keys], color="#6acc65")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    return fig


def render_stats_figures(stats: Statistics, outdir: str | Path) -> list[Path]:
    """Write distribution figures for a stats bundle; returns file paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    _save(
        _hist_figure(stats.video_duration_hist, "Video duration", "seconds"),
        outdir, "video_duration.png", written,
    )
    _save(
        _hist_figure(stats.object_duration_hist, "Object duration", "seconds"),
        outdir, "object_duration.png", written,
    )
    _save(
        _count_figure(stats.objects_per_video, "Objects per video", "objects"),
        outdir, "objects_per_video.png", written,
    )
    _save(
        _count_figure(
            stats.descriptions_per_object, "Descriptions per object", "descriptions"
        ),
        outdir, "descriptions_per_object.png", written,
    )

    fig, ax = plt.subplots(figsize=(4, 3.2))
    types = sorted(stats.type_counts)
    ax.bar(types, [stats.type_percent[t] for t in types], color="#d65f5f")
    ax.set_title("Description types")
    ax.set_ylabel("% of descriptions")
    _save(fig, outdir, "description_types.png", written)
    return written


def render_report_figures(report: EvalReport, outdir: str | Path) -> list[Path]:
    """Write per-type and bucket bar charts for an evaluation report."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def grouped_bars(groups: dict[str, dict], title: str, fname: str) -> None:
        labels = list(groups)
        fig, ax = plt.subplots(figsize=(6, 3.4))
        n = len(METRIC_KEYS)
        for mi, key in enumerate(METRIC_KEYS):
            xs = [gi + (mi - n / 2) * 0.15 for gi in range(len(labels))]
            ys = [
                100.0 * groups[g][key] if groups[g][key] is not None else 0.0
                for g in labels
            ]
            ax.bar(xs, ys, width=0.14, label=key)
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels, fontsize=8)
        ax.set_ylabel("%")
        ax.set_title(title)
        ax.legend(fontsize=7)
        _save(fig, outdir, fname, written)

    grouped_bars(
        {**report.per_type, "Overall": report.overall},
        "Results by description type",
        "per_type.png",
    )
    for kind, groups in report.buckets.items():
        grouped_bars(groups, f"Results by {kind} bucket", f"buckets_{kind}.png")
    return written
