"""Time-series flip augmentation.

Every variable sequence of a sample is either kept or reversed, giving
``2**V`` variants per sample. Variants are numbered in binary counting order
with the first variable as the most significant bit, so for two variables the
order is (same, same), (same, flipped), (flipped, same), (flipped, flipped).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from flipcal.core import SampleRecord
from flipcal.errors import (
    EmptyDataset,
    InconsistentVariableCount,
    MaskLengthMismatch,
    TooManyVariables,
)

MAX_VARIABLES = 16


@dataclass(frozen=True)
class FlipMask:
    """Per-variable reversal flags; ``bits[v]`` reverses variable ``v``."""

    bits: tuple[bool, ...]

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def index(self) -> int:
        """Position of this mask in binary counting order."""
        idx = 0
        for b in self.bits:
            idx = (idx << 1) | int(b)
        return idx

    @classmethod
    def from_index(cls, index: int, n_variables: int) -> "FlipMask":
        if not 0 <= index < 2**n_variables:
            raise ValueError(f"mask index {index} out of range for V={n_variables}")
        return cls(tuple(bool((index >> (n_variables - 1 - v)) & 1) for v in range(n_variables)))


def enumerate_masks(n_variables: int) -> list[FlipMask]:
    if n_variables < 1:
        raise ValueError("need at least one variable")
    if n_variables > MAX_VARIABLES:
        raise TooManyVariables(
            f"{n_variables} variables would produce 2**{n_variables} variants (limit {MAX_VARIABLES})"
        )
    return [FlipMask.from_index(i, n_variables) for i in range(2**n_variables)]


def apply_mask(sample: SampleRecord, mask: FlipMask) -> SampleRecord:
    """Reverse the sequences selected by ``mask``.

    The result's ``variant`` is the XOR of the input's variant and the mask
    index, so applying the same mask twice restores the original record.
    """
    if len(mask) != sample.n_variables:
        raise MaskLengthMismatch(
            f"mask has {len(mask)} bits but sample {sample.id!r} has {sample.n_variables} variables"
        )
    seqs = sample.sequences.copy()
    for v, flip in enumerate(mask.bits):
        if flip:
            seqs[v] = seqs[v, ::-1]
    return SampleRecord(
        id=sample.id,
        sequences=seqs,
        label=sample.label,
        variant=sample.variant ^ mask.index,
    )


def augment_dataset(
    samples: Sequence[SampleRecord],
) -> list[tuple[str, int, SampleRecord]]:
    """Expand every sample into all of its flip variants.

    Returns ``(sample_id, variant_index, record)`` triples, sample-major and
    variant-minor.
    """
    if not samples:
        raise EmptyDataset("cannot augment an empty dataset")
    n_variables = samples[0].n_variables
    for s in samples:
        if s.n_variables != n_variables:
            raise InconsistentVariableCount(
                f"sample {s.id!r} has {s.n_variables} variables, expected {n_variables}"
            )
    masks = enumerate_masks(n_variables)
    out = []
    for s in samples:
        for m in masks:
            out.append((s.id, m.index, apply_mask(s, m)))
    return out
