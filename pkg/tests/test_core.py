import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flipcal import TIE, Decision, Label, Outcome, PredictionTensor, ProbPair, SampleRecord
from flipcal.core import argmax_class, confidence_of, validate_prob_pair
from flipcal.errors import InputError, InvariantViolation, NonSimplex, OutOfRange

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


class TestValidateProbPair:
    def test_valid_pair_kept(self):
        assert validate_prob_pair(0.7, 0.3) == ProbPair(0.7, 0.3)

    def test_symmetric_pair(self):
        assert validate_prob_pair(0.5, 0.5) == ProbPair(0.5, 0.5)

    def test_sum_too_large(self):
        with pytest.raises(NonSimplex):
            validate_prob_pair(0.6, 0.5)

    def test_small_drift_renormalized(self):
        p = validate_prob_pair(0.7000004, 0.3)
        assert abs(p.p1 + p.p2 - 1.0) <= 1e-12
        assert p.p1 == pytest.approx(0.7000004 / 1.0000004, abs=1e-15)

    def test_sub_tolerance_drift_kept_verbatim(self):
        p = validate_prob_pair(0.7 + 1e-10, 0.3)
        assert p.p1 == 0.7 + 1e-10

    @pytest.mark.parametrize("pair", [(-0.1, 1.1), (1.2, -0.2), (math.nan, 0.5), (math.inf, 0.0)])
    def test_out_of_range(self, pair):
        with pytest.raises(OutOfRange):
            validate_prob_pair(*pair)

    def test_tiny_negative_clipped(self):
        p = validate_prob_pair(-1e-10, 1.0)
        assert p.p1 == 0.0 and p.p2 == 1.0

    def test_errors_are_input_errors(self):
        with pytest.raises(InputError):
            validate_prob_pair(0.2, 0.2)


class TestConfidenceAndArgmax:
    @pytest.mark.parametrize(
        "pair,expected", [((0.9, 0.1), 0.9), ((0.5, 0.5), 0.5), ((0.25, 0.75), 0.75)]
    )
    def test_confidence(self, pair, expected):
        assert confidence_of(ProbPair(*pair)) == expected

    def test_argmax(self):
        assert argmax_class(ProbPair(0.8, 0.2)) is Label.CLASS1
        assert argmax_class(ProbPair(0.2, 0.8)) is Label.CLASS2
        assert argmax_class(ProbPair(0.5, 0.5)) is TIE

    @given(unit)
    def test_confidence_is_one_minus_min(self, a):
        p = ProbPair(a, 1.0 - a)
        c = confidence_of(p)
        assert 0.5 <= c <= 1.0
        assert c == 1.0 - min(p.p1, p.p2) or abs(c - (1.0 - min(p.p1, p.p2))) <= 1e-15

    @given(unit)
    def test_swap_flips_argmax(self, a):
        p = ProbPair(a, 1.0 - a)
        if p.p1 == p.p2:
            assert argmax_class(p.swapped()) is TIE
        else:
            assert argmax_class(p.swapped()) is argmax_class(p).other


class TestSampleRecord:
    def test_shape_and_readonly(self):
        s = SampleRecord("a", [[1, 2, 3], [4, 5, 6]], Label.CLASS2)
        assert (s.n_variables, s.length) == (2, 3)
        assert s.sequences.dtype == np.float64
        with pytest.raises(ValueError):
            s.sequences[0, 0] = 9.0

    def test_ragged_rejected(self):
        with pytest.raises(InputError):
            SampleRecord("a", [[1, 2, 3], [4, 5]], Label.CLASS1)

    @pytest.mark.parametrize("seqs", [[[]], np.zeros((0, 3)), [1.0, 2.0]])
    def test_empty_or_flat_rejected(self, seqs):
        with pytest.raises(InputError):
            SampleRecord("a", seqs, Label.CLASS1)

    def test_int_label_coerced(self):
        assert SampleRecord("a", [[1.0]], 1).label is Label.CLASS2
        with pytest.raises(InputError):
            SampleRecord("a", [[1.0]], 2)

    def test_equality_and_hash(self):
        a = SampleRecord("a", [[1.0, 2.0]], Label.CLASS1)
        b = SampleRecord("a", np.array([[1.0, 2.0]]), Label.CLASS1)
        assert a == b and hash(a) == hash(b)
        assert a != SampleRecord("a", [[1.0, 2.0]], Label.CLASS1, variant=1)


class TestPredictionTensor:
    def test_valid(self):
        t = PredictionTensor("a", np.full((3, 4, 2), 0.5))
        assert (t.n_runs, t.n_variants) == (3, 4)
        assert t.cell(2, 3) == ProbPair(0.5, 0.5)

    def test_variant_count_power_of_two(self):
        with pytest.raises(InputError):
            PredictionTensor("a", np.full((1, 3, 2), 0.5))

    def test_simplex_checked(self):
        runs = np.full((1, 2, 2), 0.5)
        runs[0, 1] = (0.6, 0.5)
        with pytest.raises(NonSimplex):
            PredictionTensor("a", runs)

    def test_range_checked(self):
        runs = np.full((1, 2, 2), 0.5)
        runs[0, 1] = (1.5, -0.5)
        with pytest.raises(OutOfRange):
            PredictionTensor("a", runs)

    def test_no_runs(self):
        with pytest.raises(InputError):
            PredictionTensor("a", np.zeros((0, 2, 2)))


class TestDecision:
    def test_rejected_has_no_confidence(self):
        d = Decision("a", Outcome.REJECTED, None, "method1")
        assert d.rejected and d.label is None
        with pytest.raises(InvariantViolation):
            Decision("a", Outcome.REJECTED, 0.7, "method1")

    def test_accepted_needs_confidence_in_range(self):
        assert Decision("a", Outcome.CLASS2, 0.5, "method3").label is Label.CLASS2
        with pytest.raises(InvariantViolation):
            Decision("a", Outcome.CLASS1, None, "method3")
        with pytest.raises(InvariantViolation):
            Decision("a", Outcome.CLASS1, 0.4, "method3")

    def test_outcome_label_round_trip(self):
        for label in Label:
            assert Outcome.from_label(label).label is label
