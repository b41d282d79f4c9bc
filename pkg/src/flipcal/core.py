"""Domain types shared by every other module.

Class 1 maps to index 0 and class 2 to index 1. The rejection state ("class 3")
is never a label; it only appears as :attr:`Outcome.REJECTED` on a decision.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from flipcal.errors import InputError, InvariantViolation, NonSimplex, OutOfRange

#: Simplex tolerance applied to values coming from files.
INGEST_TOL = 1e-6
#: Simplex tolerance for values produced inside the package.
INTERNAL_TOL = 1e-9


class Label(enum.IntEnum):
    CLASS1 = 0
    CLASS2 = 1

    @property
    def other(self) -> "Label":
        return Label(1 - self.value)


class Outcome(enum.Enum):
    CLASS1 = "class1"
    CLASS2 = "class2"
    REJECTED = "rejected"

    @classmethod
    def from_label(cls, label: Label) -> "Outcome":
        return cls.CLASS1 if label == Label.CLASS1 else cls.CLASS2

    @property
    def label(self) -> Label | None:
        if self is Outcome.REJECTED:
            return None
        return Label.CLASS1 if self is Outcome.CLASS1 else Label.CLASS2


class _Tie(enum.Enum):
    TIE = "tie"

    def __repr__(self) -> str:
        return "TIE"


#: Returned by :func:`argmax_class` for an exact 0.5/0.5 pair.
TIE = _Tie.TIE


@dataclass(frozen=True)
class ProbPair:
    """Binary probability vector ``(p1, p2)`` for classes 1 and 2."""

    p1: float
    p2: float

    def __post_init__(self) -> None:
        for v in (self.p1, self.p2):
            if not math.isfinite(v):
                raise OutOfRange(f"non-finite probability {v!r}")
            if v < -INTERNAL_TOL or v > 1.0 + INTERNAL_TOL:
                raise OutOfRange(f"probability {v!r} outside [0, 1]")
        if abs(self.p1 + self.p2 - 1.0) > INTERNAL_TOL:
            raise NonSimplex(f"({self.p1!r}, {self.p2!r}) does not sum to 1")

    def __iter__(self):
        yield self.p1
        yield self.p2

    def __getitem__(self, index: int) -> float:
        return (self.p1, self.p2)[index]

    def swapped(self) -> "ProbPair":
        return ProbPair(self.p2, self.p1)

    def as_tuple(self) -> tuple[float, float]:
        return (self.p1, self.p2)


def validate_prob_pair(p1: float, p2: float) -> ProbPair:
    """Validate a raw pair of numbers, renormalizing small rounding drift.

    Pairs whose sum is within ``1e-9`` of one are kept verbatim, pairs within
    ``1e-6`` are divided by their sum, anything further off is rejected.
    """
    p1 = float(p1)
    p2 = float(p2)
    for v in (p1, p2):
        if not math.isfinite(v):
            raise OutOfRange(f"non-finite probability {v!r}")
        if v < -INTERNAL_TOL or v > 1.0 + INTERNAL_TOL:
            raise OutOfRange(f"probability {v!r} outside [0, 1]")
    total = p1 + p2
    if abs(total - 1.0) > INGEST_TOL:
        raise NonSimplex(f"({p1!r}, {p2!r}) sums to {total!r}")
    p1 = min(max(p1, 0.0), 1.0)
    p2 = min(max(p2, 0.0), 1.0)
    if abs(p1 + p2 - 1.0) > INTERNAL_TOL:
        total = p1 + p2
        p1, p2 = p1 / total, p2 / total
    return ProbPair(p1, p2)


def confidence_of(p: ProbPair) -> float:
    """Maximum class probability, always in [0.5, 1]."""
    return max(p.p1, p.p2)


def argmax_class(p: ProbPair) -> Label | _Tie:
    """Index of the larger component, or :data:`TIE` for an exact tie."""
    if p.p1 > p.p2:
        return Label.CLASS1
    if p.p2 > p.p1:
        return Label.CLASS2
    return TIE


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SampleRecord:
    """One windowed multivariate time-series sample.

    ``sequences`` has shape ``(V, L)``. ``variant`` is the flip-mask index that
    produced this record from the original (0 for the original itself).
    """

    id: str
    sequences: np.ndarray
    label: Label
    variant: int = 0

    def __post_init__(self) -> None:
        seqs = self.sequences
        if not isinstance(seqs, np.ndarray) or seqs.flags.writeable or seqs.dtype != np.float64:
            try:
                seqs = _frozen_array(seqs)
            except ValueError as exc:
                raise InputError(f"sample {self.id!r}: sequences must have equal length") from exc
            object.__setattr__(self, "sequences", seqs)
        if seqs.ndim != 2 or seqs.shape[0] < 1 or seqs.shape[1] < 1:
            raise InputError(
                f"sample {self.id!r}: expected V>=1 sequences of length L>=1, got shape {seqs.shape}"
            )
        if not isinstance(self.label, Label):
            try:
                object.__setattr__(self, "label", Label(int(self.label)))
            except ValueError as exc:
                raise InputError(f"sample {self.id!r}: invalid label {self.label!r}") from exc

    @property
    def n_variables(self) -> int:
        return self.sequences.shape[0]

    @property
    def length(self) -> int:
        return self.sequences.shape[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SampleRecord):
            return NotImplemented
        return (
            self.id == other.id
            and self.label == other.label
            and self.variant == other.variant
            and self.sequences.shape == other.sequences.shape
            and bool(np.array_equal(self.sequences, other.sequences))
        )

    def __hash__(self) -> int:
        return hash((self.id, self.label, self.variant, self.sequences.tobytes()))


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class PredictionTensor:
    """Monte-Carlo prediction runs for all flip variants of one sample.

    ``runs`` has shape ``(T, N, 2)``: run index, variant index, class.
    """

    sample_id: str
    runs: np.ndarray

    def __post_init__(self) -> None:
        runs = _frozen_array(self.runs)
        object.__setattr__(self, "runs", runs)
        if runs.ndim != 3 or runs.shape[2] != 2:
            raise InputError(f"{self.sample_id!r}: runs must have shape (T, N, 2), got {runs.shape}")
        T, N, _ = runs.shape
        if T < 1:
            raise InputError(f"{self.sample_id!r}: no runs")
        if not _is_power_of_two(N):
            raise InputError(f"{self.sample_id!r}: variant count {N} is not a power of two")
        if not np.all(np.isfinite(runs)):
            raise OutOfRange(f"{self.sample_id!r}: non-finite probability")
        if runs.min() < -INTERNAL_TOL or runs.max() > 1.0 + INTERNAL_TOL:
            raise OutOfRange(f"{self.sample_id!r}: probability outside [0, 1]")
        if np.max(np.abs(runs.sum(axis=2) - 1.0)) > INTERNAL_TOL:
            raise NonSimplex(f"{self.sample_id!r}: a run does not sum to 1")

    @property
    def n_runs(self) -> int:
        return self.runs.shape[0]

    @property
    def n_variants(self) -> int:
        return self.runs.shape[1]

    def cell(self, run: int, variant: int) -> ProbPair:
        p1, p2 = self.runs[run, variant]
        return ProbPair(float(p1), float(p2))


@dataclass(frozen=True)
class Decision:
    """A method's verdict on one sample.

    ``probs`` is the probability pair the method exposes for this verdict; its
    maximum is ``confidence``. It feeds the NLL and Brier computations.
    """

    sample_id: str
    outcome: Outcome
    confidence: float | None
    decided_by: str
    probs: ProbPair | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.outcome is Outcome.REJECTED:
            if self.confidence is not None:
                raise InvariantViolation("a rejected decision carries no confidence")
        else:
            if self.confidence is None:
                raise InvariantViolation("an accepted decision needs a confidence")
            if not (0.5 - INTERNAL_TOL <= self.confidence <= 1.0 + INTERNAL_TOL):
                raise InvariantViolation(f"confidence {self.confidence!r} outside [0.5, 1]")

    @property
    def rejected(self) -> bool:
        return self.outcome is Outcome.REJECTED

    @property
    def label(self) -> Label | None:
        return self.outcome.label
