"""Synthetic scenario: labeled time series plus a stand-in stochastic predictor.

Samples carry ``V`` variables (by default two, shaped like RSSI and SINR
readings). Each variable is a stationary AR(1) process with unit marginal
variance whose mean is shifted by ``+separation/2`` for class 1 and
``-separation/2`` for class 2, then mapped to a measurement scale.

The predictor scores each flip variant with a recency-weighted average of the
standardized sequences as presented (so reversing a sequence changes which
end dominates), adds independent per-variant noise, and turns the result into
the exact posterior P(class 1 | score). That base predictor is calibrated by
construction; ``miscalibration`` then sharpens (>1) or flattens (<1) it.
Every Monte-Carlo run adds Gaussian jitter to the pair and renormalizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from flipcal.augment import MAX_VARIABLES, augment_dataset, enumerate_masks
from flipcal.core import Label, PredictionTensor, SampleRecord
from flipcal.errors import InvalidConfig

# (offset, scale) per variable; extra variables are left standardized
VARIABLE_LEVELS = ((-70.0, 4.0), (10.0, 3.0))

_STREAM_SAMPLES = {"eval": 0, "train": 1}
_STREAM_VARIANT_NOISE = 2
_STREAM_RUN_JITTER = 3


@dataclass(frozen=True)
class ScenarioConfig:
    n_samples: int = 2000
    sequence_length: int = 24
    n_variables: int = 2
    class_balance: float = 0.5
    separation: float = 1.0
    ar_coef: float = 0.3
    recency: float = 0.8
    variant_noise: float = 0.3
    noise_scale: float = 0.05
    miscalibration: float = 1.0
    mc_runs: int = 15
    seed: int = 0

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        checks = [
            (self.n_samples >= 1, "n_samples must be positive"),
            (self.sequence_length >= 1, "sequence_length must be positive"),
            (1 <= self.n_variables <= MAX_VARIABLES, f"n_variables must lie in [1, {MAX_VARIABLES}]"),
            (0.0 < self.class_balance < 1.0, "class_balance must lie in (0, 1)"),
            (self.separation >= 0.0, "separation must be non-negative"),
            (-1.0 < self.ar_coef < 1.0, "ar_coef must lie in (-1, 1)"),
            (0.0 < self.recency <= 1.0, "recency must lie in (0, 1]"),
            (self.variant_noise >= 0.0, "variant_noise must be non-negative"),
            (self.noise_scale >= 0.0, "noise_scale must be non-negative"),
            (self.miscalibration > 0.0, "miscalibration must be positive"),
            (self.mc_runs >= 1, "mc_runs must be positive"),
        ]
        for ok, msg in checks:
            if not ok:
                raise InvalidConfig(msg)
        for name in ("class_balance", "separation", "ar_coef", "recency", "variant_noise",
                     "noise_scale", "miscalibration"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidConfig(f"{name} must be finite")


def _levels(v: int) -> tuple[float, float]:
    return VARIABLE_LEVELS[v] if v < len(VARIABLE_LEVELS) else (0.0, 1.0)


def _rng(cfg: ScenarioConfig, stream: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, stream])


def generate_samples(cfg: ScenarioConfig, split: str = "eval") -> list[SampleRecord]:
    """Draw ``cfg.n_samples`` labeled samples.

    ``split="train"`` draws from an independent stream with the same
    distribution, for fitting the fallback classifier.
    """
    if split not in _STREAM_SAMPLES:
        raise InvalidConfig(f"unknown split {split!r}")
    rng = _rng(cfg, _STREAM_SAMPLES[split])
    n, V, L, phi = cfg.n_samples, cfg.n_variables, cfg.sequence_length, cfg.ar_coef

    labels = np.where(rng.random(n) < cfg.class_balance, 0, 1)
    shift = np.where(labels == 0, cfg.separation / 2, -cfg.separation / 2)
    z = np.empty((n, V, L))
    z[..., 0] = rng.standard_normal((n, V))
    innov = math.sqrt(1.0 - phi * phi)
    for t in range(1, L):
        z[..., t] = phi * z[..., t - 1] + innov * rng.standard_normal((n, V))
    z += shift[:, None, None]

    offset = np.array([_levels(v)[0] for v in range(V)])
    scale = np.array([_levels(v)[1] for v in range(V)])
    x = offset[None, :, None] + scale[None, :, None] * z

    prefix = "t" if split == "train" else "s"
    width = max(5, len(str(n - 1)))
    return [
        SampleRecord(f"{prefix}{i:0{width}d}", x[i], Label(int(labels[i])))
        for i in range(n)
    ]


def recency_weights(length: int, recency: float) -> np.ndarray:
    """Normalized weights growing geometrically toward the last time step."""
    w = recency ** np.arange(length - 1, -1, -1, dtype=float)
    return w / w.sum()


def score_variance(cfg: ScenarioConfig) -> float:
    """Within-class variance of a variant score before the per-variant noise."""
    w = recency_weights(cfg.sequence_length, cfg.recency)
    idx = np.arange(cfg.sequence_length)
    cov = cfg.ar_coef ** np.abs(idx[:, None] - idx[None, :])
    return float(w @ cov @ w) / cfg.n_variables


def sharpen(q, gamma: float):
    """Map ``q -> q**g / (q**g + (1-q)**g)``; monotone, fixes 0, 1/2 and 1."""
    q = np.asarray(q, dtype=float)
    a = q**gamma
    b = (1.0 - q) ** gamma
    return a / (a + b)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def base_probabilities(
    augmented: Sequence[tuple[str, int, SampleRecord]], cfg: ScenarioConfig
) -> np.ndarray:
    """Sharpened class-1 probability of every augmented record, before run jitter."""
    offset = np.array([_levels(v)[0] for v in range(cfg.n_variables)])
    scale = np.array([_levels(v)[1] for v in range(cfg.n_variables)])
    w = recency_weights(cfg.sequence_length, cfg.recency)
    seqs = np.stack([rec.sequences for _, _, rec in augmented])
    if seqs.shape[1:] != (cfg.n_variables, cfg.sequence_length):
        raise InvalidConfig(
            f"records have shape {seqs.shape[1:]}, config expects "
            f"({cfg.n_variables}, {cfg.sequence_length})"
        )
    z = (seqs - offset[None, :, None]) / scale[None, :, None]
    score = (z @ w).mean(axis=1)
    noise = _rng(cfg, _STREAM_VARIANT_NOISE).standard_normal(len(augmented))
    score = score + cfg.variant_noise * noise

    total_var = score_variance(cfg) + cfg.variant_noise**2
    prior = math.log(cfg.class_balance / (1.0 - cfg.class_balance))
    logit = cfg.separation * score / total_var + prior
    # sharpening q -> q^g/(q^g+(1-q)^g) is sigmoid(g * logit)
    return _sigmoid(cfg.miscalibration * logit)


def predict_runs(
    augmented: Sequence[tuple[str, int, SampleRecord]], cfg: ScenarioConfig
) -> list[PredictionTensor]:
    """Emulate ``cfg.mc_runs`` stochastic prediction passes over every variant.

    ``augmented`` is the output of :func:`flipcal.augment.augment_dataset`.
    """
    n_variants = len(enumerate_masks(cfg.n_variables))
    if not augmented or len(augmented) % n_variants:
        raise InvalidConfig(f"expected a multiple of {n_variants} augmented records")
    n = len(augmented) // n_variants
    for k, (sid, variant, _) in enumerate(augmented):
        if variant != k % n_variants or sid != augmented[k - k % n_variants][0]:
            raise InvalidConfig("augmented records must be sample-major, variant-minor")

    q = base_probabilities(augmented, cfg).reshape(n, n_variants)
    T = cfg.mc_runs
    jitter = _rng(cfg, _STREAM_RUN_JITTER).standard_normal((T, n, n_variants, 2))
    a = np.clip(q[None] + cfg.noise_scale * jitter[..., 0], 0.0, 1.0)
    b = np.clip((1.0 - q)[None] + cfg.noise_scale * jitter[..., 1], 0.0, 1.0)
    total = a + b
    p1 = np.where(total > 0, a / np.where(total > 0, total, 1.0), 0.5)
    runs = np.stack([p1, 1.0 - p1], axis=-1)  # (T, n, N, 2)

    ids = [augmented[i * n_variants][0] for i in range(n)]
    return [PredictionTensor(ids[i], runs[:, i]) for i in range(n)]


def make_scenario(cfg: ScenarioConfig):
    """Samples and their prediction tensors for one configuration."""
    samples = generate_samples(cfg)
    return samples, predict_runs(augment_dataset(samples), cfg)
