"""Calibration metrics for binary decisions.

Confidences live in [0.5, 1] and are grouped into equal-width bins. The
calibration error of a bin is the distance between its accuracy and the bin
*center*, not the bins' mean confidence; pass ``reference="mean_confidence"``
to :func:`ece_mce` for the more common mean-confidence variant.

ECE, MCE, MC, MA, RS and BSL are reported as percentages, NLL as a plain
mean of natural-log losses.
"""

from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from flipcal.core import Decision, Label, ProbPair
from flipcal.errors import InvalidBinWidth, NoSamples, RejectedDecisionPresent

DEFAULT_BIN_WIDTH = 0.1
NLL_CLIP = 1e-12
BALANCE_TOL = 1e-9


class Flag(enum.Enum):
    OC = "OC"
    UC = "UC"
    BALANCED = "Balanced"


@dataclass(frozen=True)
class ConfidenceBin:
    lower: float
    upper: float
    count: int = 0
    correct: int = 0
    mean_confidence: float | None = None

    @property
    def center(self) -> float:
        return (self.lower + self.upper) / 2

    @property
    def accuracy(self) -> float | None:
        return self.correct / self.count if self.count else None


@dataclass(frozen=True)
class CalibrationReport:
    bins: tuple[ConfidenceBin, ...]
    ece: float
    mce: float
    mc: float
    ma: float
    nll: float
    bsl: float
    rs: float
    flag: Flag
    n_samples: int
    bin_width: float = DEFAULT_BIN_WIDTH


def bin_edges(bin_width: float = DEFAULT_BIN_WIDTH) -> list[float]:
    if not (0 < bin_width <= 0.5):
        raise InvalidBinWidth(f"bin width must lie in (0, 0.5], got {bin_width!r}")
    n_bins = round(0.5 / bin_width)
    if n_bins < 1 or abs(n_bins * bin_width - 0.5) > 1e-9:
        raise InvalidBinWidth(f"bin width {bin_width!r} does not divide [0.5, 1] evenly")
    edges = [round(0.5 + k * bin_width, 12) for k in range(n_bins)]
    return edges + [1.0]


def bin_index(confidence: float, edges: Sequence[float]) -> int:
    """Bin of ``confidence``; bins are half-open except the last, closed at 1."""
    i = bisect.bisect_right(edges, confidence) - 1
    return min(max(i, 0), len(edges) - 2)


def bin_decisions(
    decisions: Sequence[tuple[Decision, Label]],
    bin_width: float = DEFAULT_BIN_WIDTH,
) -> list[ConfidenceBin]:
    edges = bin_edges(bin_width)
    n_bins = len(edges) - 1
    counts = [0] * n_bins
    correct = [0] * n_bins
    conf_sums = [0.0] * n_bins
    for d, y in decisions:
        if d.rejected:
            raise RejectedDecisionPresent(
                f"sample {d.sample_id!r} is rejected; resolve it before computing metrics"
            )
        i = bin_index(d.confidence, edges)
        counts[i] += 1
        correct[i] += d.label == y
        conf_sums[i] += d.confidence
    return [
        ConfidenceBin(
            lower=edges[i],
            upper=edges[i + 1],
            count=counts[i],
            correct=correct[i],
            mean_confidence=conf_sums[i] / counts[i] if counts[i] else None,
        )
        for i in range(n_bins)
    ]


def _total(bins: Sequence[ConfidenceBin]) -> int:
    total = sum(b.count for b in bins)
    if total < 1:
        raise NoSamples("no samples in any bin")
    return total


def mc_ma(bins: Sequence[ConfidenceBin]) -> tuple[float, float]:
    """Count-weighted mean confidence and mean accuracy, in percent."""
    total = _total(bins)
    mc = sum(b.count * b.mean_confidence for b in bins if b.count) / total
    ma = sum(b.count * b.accuracy for b in bins if b.count) / total
    return 100.0 * mc, 100.0 * ma


def reliability_score(mc: float, ma: float) -> tuple[float, Flag]:
    """Magnitude of MA - MC and whether the model is over- or under-confident."""
    diff = ma - mc
    if abs(diff) <= BALANCE_TOL:
        return abs(diff), Flag.BALANCED
    return abs(diff), (Flag.OC if mc > ma else Flag.UC)


def ece_mce(bins: Sequence[ConfidenceBin], reference: str = "center") -> tuple[float, float]:
    """Expected and maximum calibration error in percent.

    Empty bins contribute to neither value.
    """
    if reference not in ("center", "mean_confidence"):
        raise ValueError(f"unknown reference {reference!r}")
    total = _total(bins)
    ece = 0.0
    mce = 0.0
    for b in bins:
        if not b.count:
            continue
        target = b.center if reference == "center" else b.mean_confidence
        err = abs(b.accuracy - target)
        ece += b.count / total * err
        mce = max(mce, err)
    return 100.0 * ece, 100.0 * mce


def _prob_label_arrays(predictions: Sequence[tuple[ProbPair, Label]]) -> tuple[np.ndarray, np.ndarray]:
    if len(predictions) < 1:
        raise NoSamples("no predictions")
    probs = np.array([(p.p1, p.p2) for p, _ in predictions], dtype=float)
    labels = np.array([int(y) for _, y in predictions], dtype=int)
    return probs, labels


def nll(predictions: Sequence[tuple[ProbPair, Label]]) -> float:
    """Mean of ``-ln p(true class)`` with probabilities clipped at 1e-12."""
    probs, labels = _prob_label_arrays(predictions)
    p_true = np.clip(probs[np.arange(len(labels)), labels], NLL_CLIP, 1.0)
    return float(np.mean(-np.log(p_true)))


def bsl(predictions: Sequence[tuple[ProbPair, Label]]) -> float:
    """Brier score against one-hot targets, averaged over both classes, in percent."""
    probs, labels = _prob_label_arrays(predictions)
    onehot = np.eye(2)[labels]
    return 100.0 * float(np.mean(np.mean((probs - onehot) ** 2, axis=1)))


def build_report(
    decisions: Sequence[Decision],
    predictions: Sequence[ProbPair] | None,
    labels: Sequence[Label],
    bin_width: float = DEFAULT_BIN_WIDTH,
) -> CalibrationReport:
    """All metrics for one set of resolved decisions.

    When ``predictions`` is None each decision's own probability pair is used,
    which keeps NLL/BSL consistent with the confidence being binned.
    """
    if len(decisions) != len(labels):
        raise ValueError(f"{len(decisions)} decisions but {len(labels)} labels")
    if predictions is None:
        predictions = [d.probs for d in decisions]
    elif len(predictions) != len(decisions):
        raise ValueError(f"{len(decisions)} decisions but {len(predictions)} predictions")
    if not decisions:
        raise NoSamples("no decisions to score")
    labels = [Label(int(y)) for y in labels]
    bins = bin_decisions(list(zip(decisions, labels)), bin_width)
    ece, mce = ece_mce(bins)
    mc, ma = mc_ma(bins)
    rs, flag = reliability_score(mc, ma)
    pairs = list(zip(predictions, labels))
    return CalibrationReport(
        bins=tuple(bins),
        ece=ece,
        mce=mce,
        mc=mc,
        ma=ma,
        nll=nll(pairs),
        bsl=bsl(pairs),
        rs=rs,
        flag=flag,
        n_samples=len(decisions),
        bin_width=bin_width,
    )


TABLE_COLUMNS = ("ECE (%)", "MCE (%)", "MC (%)", "MA (%)", "NLL", "BSL (%)", "OC or UC", "RS (%)")


def format_table(rows: Sequence[tuple[str, CalibrationReport]]) -> str:
    """Fixed-width comparison table, one row per pipeline."""
    header = ("pipeline",) + TABLE_COLUMNS
    body = []
    for name, r in rows:
        flag = r.flag.value
        body.append(
            (
                name,
                f"{r.ece:.2f}",
                f"{r.mce:.2f}",
                f"{r.mc:.2f}",
                f"{r.ma:.2f}",
                f"{r.nll:.2f}",
                f"{r.bsl:.2f}",
                flag,
                f"{r.rs:.2f}",
            )
        )
    widths = [max(len(str(row[i])) for row in [header] + body) for i in range(len(header))]
    lines = []
    for row in [header] + body:
        cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"
