"""Reliability diagrams: accuracy per confidence bin against the ideal diagonal."""

from __future__ import annotations

import io
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from flipcal.errors import EmptyReport  # noqa: E402
from flipcal.metrics import CalibrationReport  # noqa: E402

_MARKERS = "osD^v<>ph*"


def bins_table(entries: Sequence[tuple[str, CalibrationReport]]) -> str:
    """Plain-text rows of (pipeline, bin center, accuracy, count, mean confidence)."""
    if not entries:
        raise EmptyReport("no reports to tabulate")
    lines = ["pipeline,center,accuracy,count,mean_confidence"]
    for name, report in entries:
        if not report.bins:
            raise EmptyReport(f"report {name!r} has no bins")
        for b in report.bins:
            acc = "" if b.accuracy is None else f"{b.accuracy:.6f}"
            mconf = "" if b.mean_confidence is None else f"{b.mean_confidence:.6f}"
            lines.append(f"{name},{b.center:.4f},{acc},{b.count},{mconf}")
    return "\n".join(lines) + "\n"


def render_svg(entries: Sequence[tuple[str, CalibrationReport]], title: str | None = None) -> str:
    """One marker series per pipeline over the ideal ``accuracy == center`` line.

    Points below the line are over-confident, points above under-confident.
    Empty bins are not drawn.
    """
    if not entries:
        raise EmptyReport("no reports to plot")
    with matplotlib.rc_context({"svg.hashsalt": "flipcal", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.8))
        ax.fill_between([0.5, 1.0], [0.5, 1.0], [0.4, 0.4], color="tab:red", alpha=0.06, lw=0)
        ax.fill_between([0.5, 1.0], [0.5, 1.0], [1.02, 1.02], color="tab:blue", alpha=0.06, lw=0)
        ax.plot([0.5, 1.0], [0.5, 1.0], color="black", ls="--", lw=1, label="ideal")
        ax.text(0.98, 0.45, "over-confidence", ha="right", va="bottom", fontsize=8, color="tab:red")
        ax.text(0.52, 0.97, "under-confidence", ha="left", va="top", fontsize=8, color="tab:blue")
        for k, (name, report) in enumerate(entries):
            if not report.bins:
                raise EmptyReport(f"report {name!r} has no bins")
            pts = [(b.center, b.accuracy) for b in report.bins if b.count]
            if not pts:
                continue
            xs, ys = zip(*pts)
            ax.plot(xs, ys, marker=_MARKERS[k % len(_MARKERS)], ms=5, lw=1, label=name)
        ax.set_xlim(0.5, 1.0)
        ax.set_ylim(0.4, 1.02)
        ax.set_xlabel("confidence (bin center)")
        ax.set_ylabel("accuracy")
        if title:
            ax.set_title(title)
        ax.legend(fontsize=8, loc="lower right")
        ax.grid(True, lw=0.3)
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()
