"""Decision methods that fuse the averaged predictions of all flip variants.

Method 1 neutralizes low-quality pairs, sums, rounds and rescales, and
rejects anything that does not come out one-hot. Method 2 votes and rejects
ties. Method 3 keeps the single most confident variant and never rejects.
Rejected samples can be handed to Method 3 or to a fallback classifier that
only sees the original sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from flipcal import fallback as fb
from flipcal.core import (
    TIE,
    Decision,
    Label,
    Outcome,
    ProbPair,
    SampleRecord,
    argmax_class,
    confidence_of,
)
from flipcal.ensemble import AveragedPrediction
from flipcal.errors import (
    ConfigError,
    EmptyBetaList,
    InputError,
    InvariantViolation,
    MissingFallbackModel,
    MissingOriginalSamples,
)

DEFAULT_BETA = 0.4
DEFAULT_SWEEP_RESOLUTION = 0.02

# absorbs representation error so that range endpoints count as inside
_BOUNDARY_TOL = 1e-12

PRIMARIES = ("method1", "method2", "method3", "no_method", "fallback")
CONTINUATIONS = ("none", "method3", "fallback")

#: Named pipelines as (primary, continuation).
PIPELINES: dict[str, tuple[str, str]] = {
    "no_method": ("no_method", "none"),
    "fallback": ("fallback", "none"),
    "m1+fallback": ("method1", "fallback"),
    "m2+fallback": ("method2", "fallback"),
    "method3": ("method3", "none"),
    "m1+m3": ("method1", "method3"),
    "m2+m3": ("method2", "method3"),
}


@dataclass(frozen=True)
class BetaFilter:
    beta: float

    def __post_init__(self) -> None:
        if not (0.0 < self.beta < 0.5):
            raise ConfigError(f"beta must lie in (0, 0.5), got {self.beta!r}")


@dataclass(frozen=True)
class PipelineConfig:
    beta: float = DEFAULT_BETA
    # class assigned when Method 3 (or a bare argmax stage) lands on an exact tie
    tie_label: Label = Label.CLASS1

    def __post_init__(self) -> None:
        BetaFilter(self.beta)


@dataclass(frozen=True)
class MethodReport:
    decisions: tuple[Decision, ...]
    rejected_ids: tuple[str, ...]
    continuation_used: str
    primary: str = ""

    @property
    def n_rejected_final(self) -> int:
        return sum(d.rejected for d in self.decisions)


def round_half_away(x: float) -> int:
    """Round to the nearest integer, halves away from zero."""
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def _neutralized(p1: float, p2: float, beta: float) -> bool:
    # p1 in [beta, 1-beta] <=> both components >= beta
    return min(p1, p2) >= beta - _BOUNDARY_TOL


def beta_filter(p: ProbPair, f: BetaFilter) -> ProbPair:
    """Replace ``p`` by (0.5, 0.5) when it lies in the closed range [beta, 1-beta]."""
    if _neutralized(p.p1, p.p2, f.beta):
        return ProbPair(0.5, 0.5)
    return p


def _accepted(sample_id: str, label: Label, probs: ProbPair, decided_by: str) -> Decision:
    conf = min(max(confidence_of(probs), 0.5), 1.0)
    return Decision(sample_id, Outcome.from_label(label), conf, decided_by, probs)


def _rejected(sample_id: str, decided_by: str) -> Decision:
    return Decision(sample_id, Outcome.REJECTED, None, decided_by)


def _resolve_tie(vote, tie_label: Label) -> Label:
    return tie_label if vote is TIE else vote


def method1(a: AveragedPrediction, f: BetaFilter) -> Decision:
    """Filter, sum, round, rescale, round again; accept only one-hot results.

    The reported probability pair is the filtered mean (sum / N) before any
    rounding.
    """
    n = a.n_variants
    if n < 2:
        raise InputError(f"{a.sample_id!r}: method1 needs at least two variants")
    s1 = s2 = 0.0
    for p in a.pairs():
        p = beta_filter(p, f)
        s1 += p.p1
        s2 += p.p2
    q1 = round_half_away(round_half_away(s1) / n)
    q2 = round_half_away(round_half_away(s2) / n)
    if (q1, q2) == (1, 0):
        label = Label.CLASS1
    elif (q1, q2) == (0, 1):
        label = Label.CLASS2
    else:
        return _rejected(a.sample_id, "method1")
    return _accepted(a.sample_id, label, ProbPair(s1 / n, s2 / n), "method1")


def method2(a: AveragedPrediction) -> Decision:
    """Majority vote over variant argmaxes; exact-tie variants abstain.

    The reported pair is the mean over the variants that voted for the winner.
    """
    if a.n_variants < 2:
        raise InputError(f"{a.sample_id!r}: method2 needs at least two variants")
    pairs = a.pairs()
    votes = [argmax_class(p) for p in pairs]
    n1 = sum(v is Label.CLASS1 for v in votes)
    n2 = sum(v is Label.CLASS2 for v in votes)
    if n1 == n2:
        return _rejected(a.sample_id, "method2")
    winner = Label.CLASS1 if n1 > n2 else Label.CLASS2
    s1 = s2 = 0.0
    k = 0
    for p, v in zip(pairs, votes):
        if v is winner:
            s1 += p.p1
            s2 += p.p2
            k += 1
    return _accepted(a.sample_id, winner, ProbPair(s1 / k, s2 / k), "method2")


def method3(a: AveragedPrediction, tie_label: Label = Label.CLASS1) -> Decision:
    """Keep the most confident variant (lowest index on equal confidence)."""
    pairs = a.pairs()
    best = max(range(len(pairs)), key=lambda i: (confidence_of(pairs[i]), -i))
    p = pairs[best]
    return _accepted(a.sample_id, _resolve_tie(argmax_class(p), tie_label), p, "method3")


def no_method(a: AveragedPrediction, tie_label: Label = Label.CLASS1) -> Decision:
    """Baseline: the argmax of the original (variant 0) prediction."""
    p = a.pair(0)
    return _accepted(a.sample_id, _resolve_tie(argmax_class(p), tie_label), p, "no_method")


def fallback_decision(
    model: fb.FallbackModel, sample: SampleRecord, tie_label: Label = Label.CLASS1
) -> Decision:
    p = fb.predict(model, sample)
    return _accepted(sample.id, _resolve_tie(argmax_class(p), tie_label), p, "fallback")


def run_pipeline(
    dataset: Sequence[AveragedPrediction],
    primary: str,
    continuation: str = "none",
    config: PipelineConfig = PipelineConfig(),
    fallback_model: fb.FallbackModel | None = None,
    originals: Mapping[str, SampleRecord] | None = None,
) -> MethodReport:
    """Apply ``primary`` to every sample and re-decide rejections with ``continuation``."""
    if primary not in PRIMARIES:
        raise ConfigError(f"unknown primary method {primary!r}")
    if continuation not in CONTINUATIONS:
        raise ConfigError(f"unknown continuation {continuation!r}")
    needs_fallback = "fallback" in (primary, continuation)
    if needs_fallback:
        if fallback_model is None:
            raise MissingFallbackModel(f"pipeline {primary}+{continuation} needs a fallback model")
        if originals is None:
            raise MissingOriginalSamples("the fallback classifier needs the original samples")

    def original(sample_id: str) -> SampleRecord:
        try:
            return originals[sample_id]
        except KeyError:
            raise MissingOriginalSamples(f"no original sample for {sample_id!r}") from None

    beta = BetaFilter(config.beta)
    first: list[Decision] = []
    for a in dataset:
        if primary == "method1":
            d = method1(a, beta)
        elif primary == "method2":
            d = method2(a)
        elif primary == "method3":
            d = method3(a, config.tie_label)
        elif primary == "no_method":
            d = no_method(a, config.tie_label)
        else:
            d = fallback_decision(fallback_model, original(a.sample_id), config.tie_label)
        first.append(d)

    rejected_ids = tuple(d.sample_id for d in first if d.rejected)
    if continuation == "none" or not rejected_ids:
        final = first
    else:
        final = []
        for a, d in zip(dataset, first):
            if d.rejected:
                if continuation == "method3":
                    d = method3(a, config.tie_label)
                else:
                    d = fallback_decision(fallback_model, original(a.sample_id), config.tie_label)
            final.append(d)
        if any(d.rejected for d in final):
            raise InvariantViolation("continuation left a rejected decision")
    return MethodReport(tuple(final), rejected_ids, continuation, primary)


def run_named_pipeline(
    name: str,
    dataset: Sequence[AveragedPrediction],
    config: PipelineConfig = PipelineConfig(),
    fallback_model: fb.FallbackModel | None = None,
    originals: Mapping[str, SampleRecord] | None = None,
) -> MethodReport:
    try:
        primary, continuation = PIPELINES[name]
    except KeyError:
        raise ConfigError(f"unknown pipeline {name!r}; choose from {', '.join(PIPELINES)}") from None
    return run_pipeline(dataset, primary, continuation, config, fallback_model, originals)


@dataclass(frozen=True)
class SweepRow:
    beta: float
    rejected_fraction: float
    accuracy_of_accepted: float
    n_rejected: int
    n_accepted: int
    # share of variant pairs replaced by (0.5, 0.5); monotone in beta
    neutralized_fraction: float = 0.0


def beta_grid(resolution: float = DEFAULT_SWEEP_RESOLUTION) -> list[float]:
    """Betas ``resolution, 2*resolution, ...`` strictly below 0.5."""
    if not (0.0 < resolution < 0.5):
        raise ConfigError(f"resolution must lie in (0, 0.5), got {resolution!r}")
    out = []
    k = 1
    while True:
        b = round(k * resolution, 10)
        if b >= 0.5:
            break
        out.append(b)
        k += 1
    return out


def beta_sweep(
    dataset: Sequence[AveragedPrediction],
    labels: Mapping[str, Label],
    beta_values: Sequence[float] | None = None,
    resolution: float = DEFAULT_SWEEP_RESOLUTION,
) -> list[SweepRow]:
    """Method 1 rejection rate and accepted-set accuracy for each beta.

    Vectorized over samples; the per-sample arithmetic follows :func:`method1`
    operation for operation so both give the same verdicts.
    """
    if beta_values is None:
        beta_values = beta_grid(resolution)
    if len(beta_values) == 0:
        raise EmptyBetaList("no beta values to sweep")
    if not dataset:
        raise InputError("beta sweep needs a non-empty dataset")
    n = dataset[0].n_variants
    if any(a.n_variants != n for a in dataset):
        raise InputError("all samples must have the same number of variants")
    if n < 2:
        raise InputError("method1 needs at least two variants")
    try:
        truth = np.array([int(labels[a.sample_id]) for a in dataset])
    except KeyError as exc:
        raise InputError(f"no label for sample {exc.args[0]!r}") from None
    V = np.stack([a.variants for a in dataset])  # (S, N, 2)
    lo = np.minimum(V[..., 0], V[..., 1])

    rows = []
    for beta in beta_values:
        BetaFilter(beta)
        mask = lo >= beta - _BOUNDARY_TOL
        filt = np.where(mask[..., None], 0.5, V)
        s = np.zeros((V.shape[0], 2))
        for i in range(n):
            s += filt[:, i, :]
        r = np.floor(np.floor(s + 0.5) / n + 0.5)
        class1 = (r[:, 0] == 1) & (r[:, 1] == 0)
        class2 = (r[:, 0] == 0) & (r[:, 1] == 1)
        accepted = class1 | class2
        n_acc = int(accepted.sum())
        n_rej = len(dataset) - n_acc
        pred = np.where(class1, 0, 1)
        acc = float(np.mean(pred[accepted] == truth[accepted])) if n_acc else float("nan")
        rows.append(
            SweepRow(float(beta), n_rej / len(dataset), acc, n_rej, n_acc, float(mask.mean()))
        )
    return rows
