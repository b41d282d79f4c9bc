"""Monte-Carlo averaging of repeated prediction runs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Collection, Iterable

import numpy as np

from flipcal.core import INTERNAL_TOL, PredictionTensor, ProbPair, validate_prob_pair
from flipcal.errors import (
    DuplicateCell,
    EmptyTensor,
    InputError,
    NonSimplex,
    RaggedRuns,
    UnknownSample,
)

DEFAULT_MC_RUNS = 15


@dataclass(frozen=True, eq=False)
class AveragedPrediction:
    """One averaged probability pair per flip variant, shape ``(N, 2)``."""

    sample_id: str
    variants: np.ndarray
    runs_used: int = 1

    def __post_init__(self) -> None:
        arr = np.array(self.variants, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
            raise InputError(f"{self.sample_id!r}: variants must have shape (N, 2), got {arr.shape}")
        if arr.min() < -INTERNAL_TOL or arr.max() > 1.0 + INTERNAL_TOL:
            raise InputError(f"{self.sample_id!r}: probability outside [0, 1]")
        if np.max(np.abs(arr.sum(axis=1) - 1.0)) > INTERNAL_TOL:
            raise NonSimplex(f"{self.sample_id!r}: averaged variant does not sum to 1")
        arr.setflags(write=False)
        object.__setattr__(self, "variants", arr)

    @property
    def n_variants(self) -> int:
        return self.variants.shape[0]

    def pair(self, variant: int) -> ProbPair:
        p1, p2 = self.variants[variant]
        return ProbPair(float(p1), float(p2))

    def pairs(self) -> list[ProbPair]:
        return [ProbPair(float(a), float(b)) for a, b in self.variants]

    @classmethod
    def from_pairs(cls, sample_id: str, pairs: Iterable, runs_used: int = 1) -> "AveragedPrediction":
        return cls(sample_id, np.array([tuple(p) for p in pairs], dtype=float), runs_used)


def mc_average(tensor: PredictionTensor) -> AveragedPrediction:
    """Component-wise mean over runs.

    Runs are summed one at a time in run order before dividing, so the result
    does not depend on how the caller parallelizes over samples.
    """
    runs = tensor.runs
    T = runs.shape[0]
    if T < 1:
        raise EmptyTensor(f"{tensor.sample_id!r}: no runs to average")
    acc = np.zeros(runs.shape[1:], dtype=float)
    for t in range(T):
        acc += runs[t]
    return AveragedPrediction(tensor.sample_id, acc / T, runs_used=T)


def ingest_runs(
    rows: Iterable[tuple],
    known_ids: Collection[str] | None = None,
) -> list[PredictionTensor]:
    """Group ``(sample_id, variant_index, run_index, p1, p2)`` rows into tensors.

    Every sample must carry the same variants ``0..N-1`` and every variant the
    same runs ``0..T-1``. Missing cells are an error; nothing is imputed.
    Tensors are returned in order of each sample's first appearance.
    """
    known = set(known_ids) if known_ids is not None else None
    cells: dict[str, dict[tuple[int, int], ProbPair]] = {}
    for row in rows:
        sample_id, variant, run, p1, p2 = row
        sample_id = str(sample_id)
        variant, run = int(variant), int(run)
        if known is not None and sample_id not in known:
            raise UnknownSample(f"prediction rows reference unknown sample {sample_id!r}")
        if variant < 0 or run < 0:
            raise InputError(f"{sample_id!r}: negative variant or run index")
        per_sample = cells.setdefault(sample_id, {})
        if (variant, run) in per_sample:
            raise DuplicateCell(f"duplicate cell sample={sample_id!r} variant={variant} run={run}")
        per_sample[(variant, run)] = validate_prob_pair(p1, p2)

    if not cells:
        raise EmptyTensor("no prediction rows")

    shape = None
    tensors = []
    for sample_id, per_sample in cells.items():
        n_variants = 1 + max(v for v, _ in per_sample)
        n_runs = 1 + max(r for _, r in per_sample)
        if shape is None:
            shape = (n_runs, n_variants)
        if (n_runs, n_variants) != shape or len(per_sample) != n_runs * n_variants:
            raise RaggedRuns(
                f"{sample_id!r}: expected {shape[0]} runs x {shape[1]} variants, "
                f"found {len(per_sample)} cells spanning {n_runs} x {n_variants}"
            )
        runs = np.empty((n_runs, n_variants, 2), dtype=float)
        for (v, r), p in per_sample.items():
            runs[r, v] = (p.p1, p.p2)
        tensors.append(PredictionTensor(sample_id, runs))
    return tensors
