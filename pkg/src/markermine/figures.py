"""Figure rendering for the report commands.

Figures are written straight to files (Agg backend) next to the
machine-readable reports they visualize; nothing here feeds back into the
pipeline.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analysis import AccuracyReport, FrequencyReport, extremes


def frequency_figure(report: FrequencyReport, path) -> None:
    """Marker counts in rank order (log scale) with the subsampling cap line."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    counts = [c for _, c in report.rows]
    ax.plot(range(1, len(counts) + 1), counts, drawstyle="steps-post", lw=1.5)
    if report.cap is not None:
        ax.axhline(report.cap, color="crimson", ls="--", lw=1, label=f"cap = {report.cap}")
        ax.legend(frameon=False)
    ax.set_yscale("log")
    ax.set_xlabel("marker rank")
    ax.set_ylabel("instance count")
    ax.set_title("Candidate marker frequency distribution")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def accuracy_figure(report: AccuracyReport, path, n: int = 10) -> None:
    """Hardest and easiest markers by prediction accuracy."""
    bottom, top = extremes(report, n)
    markers = bottom + list(reversed(top))
    values = [report.per_marker[m].accuracy * 100 for m in markers]
    colors = ["steelblue"] * len(bottom) + ["darkorange"] * len(top)
    fig, ax = plt.subplots(figsize=(8, 0.35 * len(markers) + 1.5))
    ax.barh(range(len(markers)), values, color=colors)
    ax.set_yticks(range(len(markers)), markers)
    ax.invert_yaxis()
    ax.axvline(report.baseline_majority * 100, color="gray", ls=":", lw=1, label="majority rule")
    ax.set_xlabel("top-%d accuracy (%%)" % report.k_for_hit)
    ax.set_title("Least and most predictable markers")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
