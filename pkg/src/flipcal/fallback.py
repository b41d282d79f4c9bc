"""Classifier used for samples a decision method rejects.

Two kinds are supported: a built-in logistic regression trained by full-batch
gradient descent on the flattened original sequences, and a table of
externally produced probabilities (for example gradient-boosting outputs
computed elsewhere) looked up by sample id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from flipcal.core import Label, ProbPair, SampleRecord, validate_prob_pair
from flipcal.errors import (
    DuplicateSampleId,
    InputError,
    NonFiniteLoss,
    SingleClassDataset,
    UnknownSampleForExternal,
)

BUILTIN = "builtin_logistic"
EXTERNAL = "external"


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    iterations: int = 300
    l2: float = 1e-3
    seed: int = 0


@dataclass(frozen=True, eq=False)
class FallbackModel:
    kind: str
    weights: np.ndarray | None = None
    bias: float = 0.0
    feature_mean: np.ndarray | None = None
    feature_scale: np.ndarray | None = None
    external_table: Mapping[str, ProbPair] = field(default_factory=dict)
    loss_history: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in (BUILTIN, EXTERNAL):
            raise InputError(f"unknown fallback kind {self.kind!r}")
        if self.kind == BUILTIN:
            if self.weights is None or not np.all(np.isfinite(self.weights)) or not math.isfinite(self.bias):
                raise NonFiniteLoss("builtin fallback weights must be finite")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _features(samples: Sequence[SampleRecord]) -> np.ndarray:
    return np.stack([s.sequences.reshape(-1) for s in samples])


def _log_loss(q: np.ndarray, y: np.ndarray) -> float:
    q = np.clip(q, 1e-12, 1.0 - 1e-12)
    return float(-np.mean(y * np.log(q) + (1.0 - y) * np.log(1.0 - q)))


def train_builtin(samples: Sequence[SampleRecord], config: TrainConfig = TrainConfig()) -> FallbackModel:
    """Fit a logistic model for P(class 1) on standardized flattened sequences.

    The objective is mean binary cross-entropy plus ``l2/2 * ||w||^2`` (the
    bias is not penalized). Weights start from a small Gaussian draw seeded by
    ``config.seed``; training is fully deterministic.
    """
    if len(samples) < 2:
        raise SingleClassDataset("need at least two samples")
    y = np.array([1.0 if s.label == Label.CLASS1 else 0.0 for s in samples])
    if y.min() == y.max():
        raise SingleClassDataset("training data contains a single class")
    lengths = {s.sequences.shape for s in samples}
    if len(lengths) != 1:
        raise InputError(f"training samples have mixed shapes {sorted(lengths)}")

    X = _features(samples)
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    Xs = (X - mean) / scale

    rng = np.random.default_rng(config.seed)
    w = rng.normal(0.0, 0.01, size=Xs.shape[1])
    b = 0.0
    n = len(y)
    history = []
    # divergence surfaces as a non-finite loss below, not as numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(config.iterations):
            q = _sigmoid(Xs @ w + b)
            loss = _log_loss(q, y) + 0.5 * config.l2 * float(w @ w)
            if not math.isfinite(loss):
                raise NonFiniteLoss(f"loss became {loss!r}; lower the learning rate")
            history.append(loss)
            resid = q - y
            w = w - config.learning_rate * (Xs.T @ resid / n + config.l2 * w)
            b = b - config.learning_rate * float(resid.mean())
        q = _sigmoid(Xs @ w + b)
        history.append(_log_loss(q, y) + 0.5 * config.l2 * float(w @ w))
    if not math.isfinite(history[-1]):
        raise NonFiniteLoss("final loss is not finite")

    return FallbackModel(
        kind=BUILTIN,
        weights=w,
        bias=b,
        feature_mean=mean,
        feature_scale=scale,
        loss_history=tuple(history),
    )


def linear_score(model: FallbackModel, sample: SampleRecord) -> float:
    x = (sample.sequences.reshape(-1) - model.feature_mean) / model.feature_scale
    if x.shape != model.weights.shape:
        raise InputError(
            f"sample {sample.id!r} has {x.size} features, model expects {model.weights.size}"
        )
    return float(x @ model.weights + model.bias)


def predict(model: FallbackModel, sample: SampleRecord) -> ProbPair:
    """Probability pair for the original (un-flipped) ``sample``."""
    if model.kind == EXTERNAL:
        try:
            return model.external_table[sample.id]
        except KeyError:
            raise UnknownSampleForExternal(f"no external prediction for sample {sample.id!r}") from None
    q = float(_sigmoid(np.array([linear_score(model, sample)]))[0])
    return ProbPair(q, 1.0 - q)


def load_external(rows: Iterable[tuple]) -> FallbackModel:
    """Build an external model from ``(sample_id, p1, p2)`` rows."""
    table: dict[str, ProbPair] = {}
    for sample_id, p1, p2 in rows:
        sample_id = str(sample_id)
        if sample_id in table:
            raise DuplicateSampleId(f"sample {sample_id!r} listed twice")
        table[sample_id] = validate_prob_pair(p1, p2)
    return FallbackModel(kind=EXTERNAL, external_table=table)


def export_external(model: FallbackModel, samples: Sequence[SampleRecord]) -> list[tuple[str, float, float]]:
    """Predictions for ``samples`` as rows :func:`load_external` accepts."""
    rows = []
    for s in samples:
        p = predict(model, s)
        rows.append((s.id, p.p1, p.p2))
    return rows
