import numpy as np
import pytest

from pcmkit import (
    DimensionMismatchError,
    chebyshev,
    compare_methods,
    consistent_from_weights,
    euclidean,
    kendall_tau,
    max_ratio,
    normalize,
)
from pcmkit.metrics import METRICS

U = (0.5, 0.4, 0.1)
V = (0.5, 0.3, 0.2)
W = (0.6, 0.3, 0.1)


class TestEuclidean:
    def test_identical_vectors(self):
        assert euclidean(U, U) == 0.0

    def test_hand_computed(self):
        assert euclidean((0.5, 0.5), (0.3, 0.7)) == pytest.approx(0.2 * np.sqrt(2), rel=1e-15)

    def test_symmetric(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            a = rng.uniform(0.05, 1.0, 5)
            b = rng.uniform(0.05, 1.0, 5)
            assert euclidean(a, b) == euclidean(b, a)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            euclidean((0.5, 0.5), (0.3, 0.3, 0.4))


class TestChebyshev:
    def test_bottom_pair_switch(self):
        assert chebyshev(U, V) == pytest.approx(0.1, abs=1e-15)

    def test_top_pair_switch(self):
        assert chebyshev(U, W) == pytest.approx(0.1, abs=1e-15)

    def test_identical_vectors(self):
        assert chebyshev(V, V) == 0.0


class TestMaxRatio:
    def test_bottom_switch_doubles(self):
        assert max_ratio(U, V) == pytest.approx(2.0, rel=1e-12)

    def test_top_switch_milder(self):
        assert max_ratio(U, W) == pytest.approx(4.0 / 3.0, rel=1e-12)

    def test_identity_gives_one(self):
        assert max_ratio(U, U) == 1.0

    def test_at_least_one(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            a = rng.uniform(0.05, 1.0, 4)
            b = rng.uniform(0.05, 1.0, 4)
            assert max_ratio(a, b) >= 1.0


class TestKendallTau:
    def test_identical_rankings(self):
        assert kendall_tau(U, U) == 1.0

    def test_opposite_rankings(self):
        assert kendall_tau((0.5, 0.3, 0.2), (0.2, 0.3, 0.5)) == -1.0

    def test_one_discordant_pair_of_three(self):
        assert kendall_tau((0.5, 0.3, 0.2), (0.5, 0.2, 0.3)) == pytest.approx(1 / 3)

    def test_tie_counts_as_neither(self):
        # components 1 and 2 tie in the first vector: that pair contributes 0
        tau = kendall_tau((0.4, 0.4, 0.2), (0.5, 0.3, 0.2))
        assert tau == pytest.approx(2 / 3)

    def test_joint_permutation_invariance(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a = rng.uniform(0.05, 1.0, 6)
            b = rng.uniform(0.05, 1.0, 6)
            tau = kendall_tau(a, b)
            order = rng.permutation(6)
            assert kendall_tau(a[order], b[order]) == pytest.approx(tau, abs=1e-15)

    def test_range(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            a = rng.uniform(0.05, 1.0, 5)
            b = rng.uniform(0.05, 1.0, 5)
            assert -1.0 <= kendall_tau(a, b) <= 1.0


class TestNormalizationHandling:
    def test_weight_vectors_compared_on_unit_scale(self):
        from pcmkit import Normalization

        a = normalize((2.0, 1.0, 1.0), Normalization.SUM_HUNDRED)
        b = normalize((2.0, 1.0, 1.0), Normalization.SUM_ONE)
        assert euclidean(a, b) == 0.0
        assert max_ratio(a, b) == 1.0


class TestCompareMethods:
    def test_consistent_matrix_degenerates(self, toy_ri_table):
        m = consistent_from_weights((4.0, 3.0, 2.0, 1.0))
        record = compare_methods(m, toy_ri_table)
        assert record.cr == 0.0
        for metric in METRICS:
            assert record.closer[metric]
        assert record.value("euclidean", "inverse_left") < 1e-9
        assert record.value("chebyshev", "row_geometric_mean") < 1e-9
        assert record.value("max_ratio", "inverse_left") == pytest.approx(1.0, abs=1e-9)
        assert record.value("kendall", "inverse_left") == 1.0
        assert not record.top_reversal
        assert not record.any_reversal

    def test_fully_reversed_ranking(self, full_reversal, toy_ri_table):
        record = compare_methods(full_reversal, toy_ri_table)
        assert record.value("kendall", "inverse_left") == -1.0
        assert record.any_reversal
        assert record.top_reversal

    def test_distant_reversal_weight_gaps(self, distant_reversal, toy_ri_table):
        from pcmkit import inverse_left_eigenvector, right_eigenvector

        record = compare_methods(distant_reversal, toy_ri_table)
        assert record.top_reversal
        w = right_eigenvector(distant_reversal).weights.priorities * 100
        inv = inverse_left_eigenvector(distant_reversal).priorities * 100
        assert abs(w[1] - w[4]) == pytest.approx(4.85, abs=0.05)
        assert abs(inv[1] - inv[4]) == pytest.approx(4.44, abs=0.05)

    def test_near_consistent_reversal_at_tiny_distance(self, near_consistent, toy_ri_table):
        record = compare_methods(near_consistent, toy_ri_table)
        assert record.any_reversal
        assert record.value("euclidean", "inverse_left") < 0.001

    def test_three_alternatives_degenerate(self, toy_ri_table):
        from conftest import random_reciprocal

        rng = np.random.default_rng(9)
        for _ in range(25):
            record = compare_methods(random_reciprocal(3, rng), toy_ri_table)
            assert record.value("euclidean", "inverse_left") < 1e-9
            assert record.value("chebyshev", "inverse_left") < 1e-9
            assert record.value("max_ratio", "inverse_left") < 1.0 + 1e-7
            assert record.value("kendall", "inverse_left") == 1.0
            for metric in METRICS:
                assert record.closer[metric]

    def test_metric_identity_properties(self, toy_ri_table):
        from conftest import random_reciprocal

        rng = np.random.default_rng(10)
        record = compare_methods(random_reciprocal(5, rng), toy_ri_table)
        for metric in ("euclidean", "chebyshev"):
            for value in record.values[metric]:
                assert value >= 0.0
        for value in record.values["max_ratio"]:
            assert value >= 1.0
        for value in record.values["kendall"]:
            assert -1.0 <= value <= 1.0
