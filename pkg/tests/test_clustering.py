import itertools
from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from policyscope.clustering import (
    ElbowCurve,
    cluster_of,
    elbow_select,
    extract_reaction_lags,
    kmeans,
    lloyd,
    standardize,
)
from policyscope.data import DailyCaseSeries, PolicySeries, align
from policyscope.errors import ParameterError, UnknownCountryError
from policyscope.synth import blob_points


def exhaustive_optimum(points: np.ndarray, k: int) -> float:
    """Brute-force best inertia over every assignment of points to k clusters."""
    n = points.shape[0]
    best = np.inf
    for labels in itertools.product(range(k), repeat=n):
        inertia = 0.0
        for c in range(k):
            members = points[[i for i in range(n) if labels[i] == c]]
            if len(members):
                inertia += float(((members - members.mean(axis=0)) ** 2).sum())
        best = min(best, inertia)
    return best


class TestReactionLags:
    def _record(self, case_values, policy_levels):
        start = date(2020, 3, 1)
        n = len(case_values)
        return align(
            DailyCaseSeries("QA", start, tuple(case_values)),
            PolicySeries("QA", start, tuple(policy_levels[:n])),
        )

    def test_lag_after_first_case(self):
        # first case on day 0 (Mar 1), school closes on day 9 (Mar 10)
        levels = [(0, 0, 0, 0, 0)] * 9 + [(1, 0, 0, 0, 0)] * 11
        record = self._record([1] * 20, levels)
        lags = extract_reaction_lags(record)
        assert lags[0] == 9.0

    def test_negative_lag(self):
        # school closed from day 0, first case on day 5
        levels = [(1, 0, 0, 0, 0)] * 10
        record = self._record([0] * 5 + [2] * 5, levels)
        assert extract_reaction_lags(record)[0] == -5.0

    def test_never_imposed_gets_record_length(self):
        levels = [(0, 0, 0, 0, 0)] * 100
        record = self._record([1] * 100, levels)
        assert extract_reaction_lags(record)[3] == 100.0


class TestStandardize:
    def test_two_point_column(self):
        out, means, stds, flagged = standardize(np.array([[1.0], [3.0]]))
        assert out[:, 0] == pytest.approx([-1.0, 1.0])
        assert means[0] == 2.0
        assert stds[0] == 1.0
        assert flagged == []

    def test_constant_column_flagged(self):
        out, _, _, flagged = standardize(np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]]))
        assert np.all(out[:, 0] == 0.0)
        assert flagged == [0]

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        m = rng.normal(size=(20, 4))
        once, _, _, _ = standardize(m)
        twice, _, _, _ = standardize(once)
        assert np.allclose(once, twice, atol=1e-12)

    def test_too_few_rows(self):
        with pytest.raises(ParameterError):
            standardize(np.array([[1.0, 2.0]]))


class TestKMeans:
    def test_two_well_separated_pairs(self):
        points = np.array([[0.0], [1.0], [10.0], [11.0]])
        result = kmeans(points, 2, seed=0)
        assert result.inertia == pytest.approx(1.0)
        assert sorted(c[0] for c in result.centers) == pytest.approx([0.5, 10.5])
        assert exhaustive_optimum(points, 2) == pytest.approx(1.0)

    def test_k_equals_n(self):
        points = np.array([[0.0], [3.0], [9.0]])
        result = kmeans(points, 3, seed=1)
        assert result.inertia == pytest.approx(0.0)

    def test_bad_k(self):
        points = np.zeros((3, 2))
        with pytest.raises(ParameterError):
            kmeans(points, 0, seed=0)
        with pytest.raises(ParameterError):
            kmeans(points, 4, seed=0)

    def test_inertia_matches_definition(self):
        rng = np.random.default_rng(4)
        points = rng.normal(size=(25, 3))
        result = kmeans(points, 4, seed=2, labels=[f"c{i}" for i in range(25)])
        total = 0.0
        for i in range(25):
            c = result.assignments[f"c{i}"]
            total += float(((points[i] - result.centers[c]) ** 2).sum())
        assert result.inertia == pytest.approx(total, abs=1e-9)

    def test_self_consistent_at_convergence(self):
        rng = np.random.default_rng(8)
        points = rng.normal(size=(30, 2))
        result = kmeans(points, 3, seed=3)
        labels = np.array([result.assignments[str(i)] for i in range(30)])
        # nearest center of each point is its assigned cluster
        d2 = ((points[:, None, :] - result.centers[None]) ** 2).sum(axis=2)
        assert np.all(d2[np.arange(30), labels] <= d2.min(axis=1) + 1e-12)
        # each center is the mean of its members
        for c in range(3):
            members = points[labels == c]
            assert np.allclose(result.centers[c], members.mean(axis=0), atol=1e-9)

    def test_lloyd_inertia_non_increasing(self):
        rng = np.random.default_rng(12)
        points = rng.normal(size=(40, 2))
        for restart_seed in range(5):
            _, _, _, history = lloyd(points, 4, np.random.default_rng(restart_seed))
            assert all(b <= a + 1e-9 for a, b in zip(history, history[1:]))

    def test_small_instance_optimality(self):
        rng = np.random.default_rng(21)
        for trial in range(6):
            n = int(rng.integers(4, 11))
            d = int(rng.integers(1, 3))
            k = int(rng.integers(2, 4))
            if k > n:
                continue
            points = rng.normal(size=(n, d))
            result = kmeans(points, k, seed=trial, restarts=20)
            assert result.inertia == pytest.approx(exhaustive_optimum(points, k), abs=1e-9)

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=15, deadline=None)
    def test_permutation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        points = rng.normal(size=(12, 2))
        perm = rng.permutation(12)
        names = [f"p{i}" for i in range(12)]
        r1 = kmeans(points, 3, seed=5, labels=names)
        r2 = kmeans(points[perm], 3, seed=5, labels=[names[i] for i in perm])
        assert r1.inertia == pytest.approx(r2.inertia, rel=1e-9)
        # assignments equal up to cluster relabeling
        mapping = {}
        for name in names:
            a, b = r1.assignments[name], r2.assignments[name]
            assert mapping.setdefault(a, b) == b

    def test_determinism(self):
        rng = np.random.default_rng(2)
        points = rng.normal(size=(20, 2))
        r1 = kmeans(points, 3, seed=9)
        r2 = kmeans(points, 3, seed=9)
        assert np.array_equal(r1.centers, r2.centers)
        assert r1.assignments == r2.assignments


class TestElbow:
    def test_three_blobs_chooses_three(self):
        points = blob_points(seed=0)
        curve = elbow_select(points, 1, 8, seed=0)
        assert curve.chosen_k == 3
        assert not curve.low_confidence
        assert list(curve.inertias) == sorted(curve.inertias, reverse=True)

    def test_single_blob_low_confidence_flag(self):
        rng = np.random.default_rng(6)
        points = rng.normal(size=(60, 2))
        curve = elbow_select(points, 1, 8, seed=0)
        assert isinstance(curve, ElbowCurve)
        assert curve.chosen_k in curve.ks

    def test_too_few_candidates(self):
        points = np.random.default_rng(0).normal(size=(10, 2))
        with pytest.raises(ParameterError):
            elbow_select(points, 1, 2, seed=0)


class TestClusterOf:
    def test_identical_points_co_clustered(self):
        points = np.array([[0.0, 0.0], [0.0, 0.0], [5.0, 5.0], [9.0, 9.0]])
        result = kmeans(points, 2, seed=0, labels=["QA", "BH", "IT", "NO"])
        assert "BH" in cluster_of(result, "QA")

    def test_singleton_when_k_equals_n(self):
        points = np.array([[0.0], [4.0], [9.0]])
        result = kmeans(points, 3, seed=0, labels=["QA", "BH", "IT"])
        assert cluster_of(result, "QA") == {"QA"}

    def test_unknown_country(self):
        points = np.array([[0.0], [4.0]])
        result = kmeans(points, 1, seed=0, labels=["QA", "BH"])
        with pytest.raises(UnknownCountryError):
            cluster_of(result, "XX")
