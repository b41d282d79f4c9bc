import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from flipcal.core import PredictionTensor
from flipcal.ensemble import AveragedPrediction, ingest_runs, mc_average
from flipcal.errors import DuplicateCell, EmptyTensor, NonSimplex, RaggedRuns, UnknownSample


def tensor_from_p1(p1):
    p1 = np.asarray(p1, dtype=float)
    return PredictionTensor("a", np.stack([p1, 1.0 - p1], axis=-1))


def test_two_point_mean():
    out = mc_average(PredictionTensor("a", [[[0.8, 0.2]], [[0.6, 0.4]]]))
    np.testing.assert_allclose(out.variants, [[0.7, 0.3]], atol=1e-15)
    assert out.runs_used == 2


def test_single_run_identity():
    runs = np.array([[[0.8, 0.2], [0.3, 0.7]]])
    out = mc_average(PredictionTensor("a", runs))
    np.testing.assert_array_equal(out.variants, runs[0])


def test_constant_fifteen_runs():
    out = mc_average(PredictionTensor("a", np.tile([0.9, 0.1], (15, 1, 1))))
    np.testing.assert_allclose(out.variants, [[0.9, 0.1]], atol=1e-15)


def test_sequential_sum_matches_loop():
    rng = np.random.default_rng(0)
    t = tensor_from_p1(rng.random((7, 4)))
    expected = np.zeros((4, 2))
    for r in range(7):
        expected = expected + t.runs[r]
    np.testing.assert_array_equal(mc_average(t).variants, expected / 7)


run_grids = arrays(
    np.float64,
    st.tuples(st.integers(1, 20), st.sampled_from([1, 2, 4, 8])),
    elements=st.floats(0.0, 1.0, allow_nan=False),
)


@given(run_grids, st.randoms(use_true_random=False))
@settings(max_examples=200)
def test_permutation_simplex_convexity(p1, rnd):
    t = tensor_from_p1(p1)
    base = mc_average(t).variants
    order = list(range(p1.shape[0]))
    rnd.shuffle(order)
    permuted = mc_average(PredictionTensor("a", t.runs[order])).variants
    assert np.max(np.abs(base - permuted)) <= 1e-12
    assert np.max(np.abs(base.sum(axis=1) - 1.0)) <= 1e-9
    lo, hi = t.runs.min(axis=0), t.runs.max(axis=0)
    assert np.all(base >= lo - 1e-15) and np.all(base <= hi + 1e-15)


def grid_rows(n_samples=2, n_variants=4, n_runs=3):
    return [
        (f"s{s}", v, r, 0.25, 0.75)
        for s in range(n_samples)
        for v in range(n_variants)
        for r in range(n_runs)
    ]


def test_ingest_shapes():
    rows = grid_rows()
    assert len(rows) == 24
    tensors = ingest_runs(rows, known_ids={"s0", "s1"})
    assert [t.sample_id for t in tensors] == ["s0", "s1"]
    assert all((t.n_runs, t.n_variants) == (3, 4) for t in tensors)


def test_ingest_order_independent():
    rows = grid_rows()
    a = ingest_runs(rows)
    b = ingest_runs(rows[::-1])
    assert sorted(t.sample_id for t in b) == ["s0", "s1"]
    for t in a:
        (u,) = [x for x in b if x.sample_id == t.sample_id]
        np.testing.assert_array_equal(t.runs, u.runs)


def test_missing_cell_is_ragged():
    rows = [r for r in grid_rows() if r[:3] != ("s0", 2, 1)]
    with pytest.raises(RaggedRuns):
        ingest_runs(rows)


def test_unequal_run_counts_ragged():
    rows = grid_rows(1, 2, 3) + [("s9", v, r, 0.5, 0.5) for v in range(2) for r in range(2)]
    with pytest.raises(RaggedRuns):
        ingest_runs(rows)


def test_duplicate_cell():
    rows = grid_rows() + [("s1", 0, 0, 0.5, 0.5)]
    with pytest.raises(DuplicateCell):
        ingest_runs(rows)


def test_unknown_sample():
    with pytest.raises(UnknownSample):
        ingest_runs(grid_rows(), known_ids={"s0"})


def test_empty_and_nonsimplex():
    with pytest.raises(EmptyTensor):
        ingest_runs([])
    with pytest.raises(NonSimplex):
        ingest_runs([("a", 0, 0, 0.6, 0.5)])


def test_averaged_prediction_validates():
    with pytest.raises(NonSimplex):
        AveragedPrediction("a", [[0.6, 0.5]])
