import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from flipcal.augment import FlipMask, apply_mask, augment_dataset, enumerate_masks
from flipcal.core import Label, SampleRecord
from flipcal.errors import (
    EmptyDataset,
    InconsistentVariableCount,
    MaskLengthMismatch,
    TooManyVariables,
)

F, T = False, True


def sample(*rows, label=Label.CLASS1, sid="x"):
    return SampleRecord(sid, np.array(rows, dtype=float), label)


def test_masks_v1():
    assert [m.bits for m in enumerate_masks(1)] == [(F,), (T,)]


def test_masks_v2_table_order():
    assert [m.bits for m in enumerate_masks(2)] == [(F, F), (F, T), (T, F), (T, T)]


def test_masks_v3_binary_counting():
    expected = [tuple(c == "1" for c in format(i, "03b")) for i in range(8)]
    masks = enumerate_masks(3)
    assert [m.bits for m in masks] == expected
    assert [m.index for m in masks] == list(range(8))


def test_too_many_variables():
    with pytest.raises(TooManyVariables):
        enumerate_masks(17)
    assert len(enumerate_masks(16)) == 2**16


def test_flip_second_variable():
    out = apply_mask(sample([1, 2, 3], [4, 5, 6]), FlipMask((F, T)))
    np.testing.assert_array_equal(out.sequences, [[1, 2, 3], [6, 5, 4]])
    assert out.variant == 1


def test_identity_mask():
    s = sample([1, 2, 3], [4, 5, 6])
    assert apply_mask(s, FlipMask((F, F))) == s


def test_flip_both():
    out = apply_mask(sample([1, 2, 3], [4, 5, 6]), FlipMask((T, T)))
    np.testing.assert_array_equal(out.sequences, [[3, 2, 1], [6, 5, 4]])
    assert out.variant == 3


def test_mask_length_mismatch():
    with pytest.raises(MaskLengthMismatch):
        apply_mask(sample([1, 2]), FlipMask((T, T)))


@pytest.mark.parametrize("n,V,expected", [(10, 2, 40), (1, 1, 2), (3, 3, 24)])
def test_augment_counts(n, V, expected):
    samples = [SampleRecord(f"s{i}", np.arange(V * 4.0).reshape(V, 4) + i, Label.CLASS1) for i in range(n)]
    out = augment_dataset(samples)
    assert len(out) == expected
    order = [(sid, v) for sid, v, _ in out]
    assert order == [(f"s{i}", v) for i in range(n) for v in range(2**V)]
    assert all(rec.variant == v for _, v, rec in out)


def test_augment_errors():
    with pytest.raises(EmptyDataset):
        augment_dataset([])
    with pytest.raises(InconsistentVariableCount):
        augment_dataset([sample([1, 2]), sample([1, 2], [3, 4])])


records = st.integers(1, 3).flatmap(
    lambda V: st.tuples(
        arrays(np.float64, st.tuples(st.just(V), st.integers(1, 6)),
               elements=st.floats(-1e3, 1e3, allow_nan=False)),
        st.sampled_from(list(Label)),
    )
)


@given(records)
@settings(max_examples=200)
def test_involution_and_label(data):
    seqs, label = data
    s = SampleRecord("h", seqs, label)
    for m in enumerate_masks(s.n_variables):
        once = apply_mask(s, m)
        assert once.label is label
        assert apply_mask(once, m) == s
