"""Figures for the softening sweep. Uses the non-interactive Agg backend."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_LABELS = {"pacc": "pose accuracy", "po": "occlusion (fraction of ROI)"}


def plot_softening(series: dict, path) -> Path:
    """Metric mean +- std against the softening level, with FABRIK as a band."""
    path = Path(path)
    pts = series["points"]
    fig, ax = plt.subplots(figsize=(5.0, 3.5), dpi=100)
    if pts:
        x = [p["eta"] for p in pts]
        y = [p["mean"] for p in pts]
        e = [p["std"] for p in pts]
        ax.errorbar(x, y, yerr=e, marker="o", capsize=3, label="PIC / PICs")
    ref = series.get("fabrik")
    if ref is not None:
        ax.axhline(ref["mean"], color="0.3", linestyle="--", label="FABRIK")
        ax.axhspan(ref["mean"] - ref["std"], ref["mean"] + ref["std"], color="0.85", zorder=0)
    ax.set_xticks([0, 1, 2, 3])
    ax.set_xlabel("softening level (0 = PIC)")
    ax.set_ylabel(_LABELS.get(series["metric"], series["metric"]))
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    # no timestamp metadata so repeated runs write identical files
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)
    return path
