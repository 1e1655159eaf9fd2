"""Correlation metrics against scipy oracles and closed forms."""

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from pairscale import ComparativeLevel, level_accuracy, plcc, srcc
from pairscale.errors import MetricError, ValidationError
from pairscale.metrics import average_ranks


class TestAverageRanks:
    def test_plain_ranks(self):
        np.testing.assert_array_equal(average_ranks([30, 10, 20]), [3, 1, 2])

    def test_ties_share_mean_rank(self):
        np.testing.assert_array_equal(
            average_ranks([5, 5, 1, 9]), [2.5, 2.5, 1.0, 4.0]
        )

    @given(
        values=st.lists(
            st.integers(min_value=0, max_value=6), min_size=2, max_size=40
        )
    )
    @settings(max_examples=200, deadline=None)
    def test_matches_scipy_rankdata(self, values):
        np.testing.assert_array_equal(
            average_ranks(values),
            scipy.stats.rankdata(values, method="average"),
        )


class TestSrcc:
    def test_identity_gives_one(self):
        assert srcc([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)

    def test_reversal_gives_minus_one(self):
        assert srcc([1, 2, 3, 4], [40, 30, 20, 10]) == pytest.approx(-1.0)

    def test_single_swap_hand_computed(self):
        # d^2 = (0, 1, 1, 0, 0): rho = 1 - 6*2 / (5*24) = 0.9
        assert srcc([1, 2, 3, 4, 5], [1, 3, 2, 4, 5]) == pytest.approx(0.9)

    @given(
        data=st.lists(
            st.tuples(
                st.floats(-100, 100, allow_nan=False),
                st.floats(-100, 100, allow_nan=False),
            ),
            min_size=3,
            max_size=50,
        )
    )
    @settings(max_examples=200, deadline=None)
    def test_matches_scipy_spearmanr(self, data):
        pred = [a for a, _ in data]
        truth = [b for _, b in data]
        if len(set(pred)) < 2 or len(set(truth)) < 2:
            return
        expected = scipy.stats.spearmanr(pred, truth).statistic
        assert srcc(pred, truth) == pytest.approx(expected, abs=1e-12)

    @given(
        truth=st.lists(
            st.floats(-50, 50, allow_nan=False), min_size=3, max_size=30, unique=True
        )
    )
    @settings(max_examples=100, deadline=None)
    def test_invariant_under_monotone_transform(self, truth):
        pred = list(range(len(truth)))
        base = srcc(pred, truth)
        warped = [t**3 + 2 * t for t in truth]  # strictly increasing map
        assert srcc(pred, warped) == pytest.approx(base, abs=1e-9)

    def test_degenerate_ranking_rejected(self):
        with pytest.raises(MetricError, match="degenerate ranking"):
            srcc([1, 1, 1], [1, 2, 3])

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            srcc([1, 2], [1, 2, 3])


class TestPlcc:
    def test_positive_affine_gives_one(self):
        truth = [1.0, 2.0, 5.0, 9.0]
        pred = [3 * t + 7 for t in truth]
        assert plcc(pred, truth) == pytest.approx(1.0)

    def test_negation_gives_minus_one(self):
        truth = [1.0, 2.0, 5.0, 9.0]
        pred = [-t for t in truth]
        assert plcc(pred, truth) == pytest.approx(-1.0)

    def test_matches_scipy_pearsonr(self):
        rng = np.random.default_rng(0)
        pred = rng.normal(size=40)
        truth = 0.8 * pred + rng.normal(scale=0.3, size=40)
        expected = scipy.stats.pearsonr(pred, truth).statistic
        assert plcc(pred, truth) == pytest.approx(expected, abs=1e-12)

    def test_logistic_map_near_noop_on_linear_data(self):
        rng = np.random.default_rng(1)
        pred = rng.uniform(0, 5, size=60)
        truth = 2.0 * pred + 1.0
        raw = plcc(pred, truth)
        mapped = plcc(pred, truth, logistic_map=True)
        assert abs(mapped - raw) < 1e-6

    def test_logistic_map_absorbs_sigmoid_nonlinearity(self):
        pred = np.linspace(0, 5, 80)
        truth = 1.0 / (1.0 + np.exp(-(pred - 2.5) * 3.0))  # saturating MOS
        raw = plcc(pred, truth)
        mapped = plcc(pred, truth, logistic_map=True)
        assert mapped > raw
        assert mapped == pytest.approx(1.0, abs=1e-6)

    def test_zero_variance_rejected(self):
        with pytest.raises(MetricError, match="zero variance"):
            plcc([1, 1, 1], [1, 2, 3])


class TestLevelAccuracy:
    def test_identical_lists(self):
        levels = [ComparativeLevel.WORSE, ComparativeLevel.BETTER]
        assert level_accuracy(levels, list(levels)) == 1.0

    def test_fully_mismatched(self):
        assert level_accuracy(
            [ComparativeLevel.WORSE], [ComparativeLevel.BETTER]
        ) == 0.0

    def test_three_of_four(self):
        a = [ComparativeLevel(v) for v in (0, 1, 2, 3)]
        b = [ComparativeLevel(v) for v in (0, 1, 2, 4)]
        assert level_accuracy(a, b) == 0.75

    def test_symmetric_in_arguments(self):
        rng = np.random.default_rng(2)
        a = [ComparativeLevel(int(v)) for v in rng.integers(0, 5, size=30)]
        b = [ComparativeLevel(int(v)) for v in rng.integers(0, 5, size=30)]
        assert level_accuracy(a, b) == level_accuracy(b, a)

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            level_accuracy([], [])
