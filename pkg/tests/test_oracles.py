"""
Tests holding the fast implementations to the brute-force oracles
"""
import json

import numpy as np
import pytest

from sessionclust import oracles
from sessionclust.algorithms import dbscan, hierarchical, kmeans, leader
from sessionclust.dataset import Clustering, Dataset, ReferenceLabels
from sessionclust.errors import HarnessError, IndexUndefined, OracleMismatch
from sessionclust.oracles import (
    ENUMERATED_INTERNAL,
    density_closure_violations,
    enumerated_external,
    enumerated_pair_counts,
    kmeans_global_minimum,
    kmedoids_global_minimum,
    minimum_spanning_tree,
    mst_cut_partition,
    oracle_check,
    oracle_trials,
    random_instance,
    sequential_leader,
    set_partitions,
    worst_deviations,
)
from sessionclust.validity import fowlkes_mallows, jaccard_index, pair_counts, rand_index

TOLERANCE = 1e-9


def as_points(data):
    return [tuple(row) for row in data.points.tolist()]


def defined(index, *args):
    try:
        return index(*args)
    except IndexUndefined:
        return None


def close(expected, actual):
    if expected is None or actual is None:
        return expected is None and actual is None
    return abs(expected - actual) <= TOLERANCE


class TestOracleBuildingBlocks:
    """The oracles themselves on hand-checked inputs"""

    def test_set_partition_counts(self):
        """Stirling numbers of the second kind"""
        assert len(list(set_partitions(4, 2))) == 7
        assert len(list(set_partitions(5, 3))) == 25
        assert list(set_partitions(3, 3)) == [(0, 1, 2)]
        assert list(set_partitions(2, 3)) == []

    def test_global_minima(self):
        """Two tight pairs"""
        points = [(0.0,), (1.0,), (10.0,), (11.0,)]
        assert kmeans_global_minimum(points, 2) == pytest.approx(1.0)
        assert kmedoids_global_minimum(points, 2) == pytest.approx(2.0)

    def test_minimum_spanning_tree(self):
        """m - 1 edges in ascending weight"""
        tree = minimum_spanning_tree([(0.0,), (1.0,), (5.0,), (6.0,), (20.0,)])
        assert [weight for weight, _, _ in tree] == [1.0, 1.0, 4.0, 14.0]

    def test_mst_cut(self):
        """Removing the heaviest edge splits off the far point"""
        labels, kept, unambiguous = mst_cut_partition([(0.0,), (1.0,), (5.0,), (6.0,), (20.0,)], 2)
        assert labels == [0, 0, 0, 0, 1]
        assert kept == [1.0, 1.0, 4.0]
        assert unambiguous

    def test_mst_cut_tie(self):
        """Equal kept and removed weights make the cut ambiguous"""
        _, _, unambiguous = mst_cut_partition([(0.0,), (1.0,), (2.0,)], 2)
        assert not unambiguous

    def test_sequential_leader(self):
        """The point-by-point scan"""
        assert sequential_leader([(0.0,), (0.5,), (5.0,), (5.2,), (0.1,)], 1.0) == [0, 0, 1, 1, 0]

    def test_enumerated_pairs(self):
        """NOISE points never share a cluster"""
        assert enumerated_pair_counts([0, 0, 1, 1], [0, 0, -1, -1]) == (1, 1, 0, 4)
        assert enumerated_external([0, 1, 2], [0, 1, 2]) == {
            'rand': 1.0, 'jaccard': None, 'fowlkes_mallows': None,
        }


class TestExternalAgainstEnumeration:
    """Pair counts and external indices on random pairs of labellings"""

    def test_random_labellings(self):
        """200 random (labels, clustering) pairs, NOISE included"""
        rng = np.random.default_rng(2024)
        for _ in range(200):
            m = int(rng.integers(2, 40))
            classes = rng.integers(0, int(rng.integers(1, 6)), size=m)
            assignment = rng.integers(-1, int(rng.integers(1, 6)), size=m)
            labels = ReferenceLabels(classes)
            clustering = Clustering.from_labels(assignment)

            counts = pair_counts(labels, clustering)
            expected_counts = enumerated_pair_counts(labels.labels.tolist(), clustering.assignment.tolist())
            assert (counts.a, counts.b, counts.c, counts.d) == expected_counts

            expected = enumerated_external(labels.labels.tolist(), clustering.assignment.tolist())
            assert close(expected['rand'], defined(rand_index, counts))
            assert close(expected['jaccard'], defined(jaccard_index, counts))
            assert close(expected['fowlkes_mallows'], defined(fowlkes_mallows, counts))


class TestInternalAgainstEnumeration:
    """Dunn, Davies-Bouldin, C-index and Silhouette against direct loops"""

    @pytest.mark.parametrize('name', sorted(ENUMERATED_INTERNAL))
    def test_random_clusterings(self, name):
        """100 random clusterings of random points"""
        oracle, index = ENUMERATED_INTERNAL[name]
        rng = np.random.default_rng(7)
        for trial in range(100):
            m = int(rng.integers(3, 30))
            if trial % 2:
                data = Dataset(rng.integers(0, 5, size=(m, 2)).astype(float))
            else:
                data = Dataset(rng.normal(0.0, 3.0, size=(m, int(rng.integers(1, 4)))))
            clustering = Clustering.from_labels(rng.integers(-1, int(rng.integers(2, 6)), size=m))
            expected = oracle(as_points(data), clustering.assignment.tolist())
            try:
                actual = index(data, clustering)
            except (IndexUndefined, ValueError):
                actual = None
            assert close(expected, actual), f'{name} trial {trial}: {expected} != {actual}'


class TestSingleLinkAgainstMST:
    """Single link equals cutting the minimum spanning tree"""

    def test_random_datasets(self):
        """50 random datasets; ties at the cut are skipped"""
        rng = np.random.default_rng(11)
        compared = 0
        for _ in range(50):
            m = int(rng.integers(4, 40))
            data = Dataset(rng.normal(0.0, 4.0, size=(m, 2)))
            k = int(rng.integers(2, min(6, m - 1) + 1))
            expected, weights, unambiguous = mst_cut_partition(as_points(data), k)
            result = hierarchical(data, k, 'single')

            assert sorted(result.merge_distances) == pytest.approx(weights, abs=TOLERANCE)
            if unambiguous:
                assert result.assignment.tolist() == expected
                compared += 1
        assert compared > 40


class TestDBSCANClosure:
    """DBSCAN output against the density-reachability definition"""

    def test_random_datasets(self):
        """50 random datasets with thresholds away from every distance"""
        rng = np.random.default_rng(5)
        for trial in range(50):
            m = int(rng.integers(5, 50))
            if trial % 2:
                data = Dataset(rng.integers(0, 8, size=(m, 2)).astype(float))
            else:
                data = Dataset(rng.normal(0.0, 3.0, size=(m, 2)))
            d2 = sorted({float(v) for v in (np.diff(np.sort(data.points[:, 0])) ** 2)} | {0.5})
            eps = float(rng.choice(d2)) + 0.123456789
            eta = int(rng.integers(1, 6))
            problems = density_closure_violations(as_points(data), eps, eta, dbscan(data, eps, eta))
            assert problems == [], f'trial {trial}: {problems}'


class TestExhaustiveOptima:
    """Small instances where the optimum can be enumerated"""

    def test_kmeans_never_beats_the_optimum(self):
        """Over 20 seeds J stays at or above the exhaustive minimum and never rises"""
        rng = np.random.default_rng(3)
        for _ in range(10):
            m = int(rng.integers(3, 9))
            data = Dataset(rng.normal(0.0, 2.0, size=(m, 2)))
            for k in range(2, min(3, m) + 1):
                best = kmeans_global_minimum(as_points(data), k)
                for seed in range(20):
                    result = kmeans(data, k, seed=seed)
                    assert result.objective >= best - TOLERANCE
                    assert all(b <= a + TOLERANCE for a, b in zip(result.history, result.history[1:]))

    def test_some_seed_attains_optimum_when_separable(self):
        """On well-separated groups at least one of 20 seeds finds the global minimum"""
        rng = np.random.default_rng(17)
        for _ in range(10):
            k = int(rng.integers(2, 4))
            sizes = rng.multinomial(8 - k, [1 / k] * k) + 1
            centres = np.arange(k)[:, None] * 100.0
            points = np.concatenate([
                centres[group] + rng.normal(0.0, 1.0, size=(size, 2)) for group, size in enumerate(sizes)
            ])
            data = Dataset(points)
            best = kmeans_global_minimum(as_points(data), k)
            found = min(kmeans(data, k, seed=seed).objective for seed in range(20))
            assert found == pytest.approx(best, rel=1e-9, abs=1e-9)

    def test_leader_matches_sequential_scan(self):
        """The vectorized scan assigns like the point-by-point one"""
        rng = np.random.default_rng(9)
        for _ in range(30):
            data = Dataset(rng.normal(0.0, 3.0, size=(int(rng.integers(2, 60)), 2)))
            alpha = float(rng.uniform(0.5, 20.0))
            assert leader(data, alpha).assignment.tolist() == sequential_leader(as_points(data), alpha)


class TestOracleCheck:
    """The combined randomized check"""

    def test_passes_on_random_instance(self):
        """Every check passes and reports its deviation"""
        data, labels = random_instance(np.random.default_rng(1), 20, grid=False)
        report = oracle_check(data, labels, seed=1)

        assert report.passed, report.failures
        assert report.failures == []
        names = set(report.deviations())
        assert {'pair_counts', 'rand', 'dunn', 'silhouette', 'dbscan_closure',
                'kmeans_global_min', 'leader_scan'} <= names

    def test_rejects_large_inputs(self):
        """Brute force is limited to max_m points"""
        data = Dataset(np.zeros((60, 1)))
        with pytest.raises(HarnessError, match='limited'):
            oracle_check(data, ReferenceLabels([0] * 60), seed=0)

    def test_rejects_label_mismatch(self):
        """Labels must cover every point"""
        with pytest.raises(HarnessError):
            oracle_check(Dataset.from_values([0, 1, 2]), ReferenceLabels([0, 1]), seed=0)

    def test_mismatch_carries_instance(self, monkeypatch):
        """A disagreeing oracle raises with a replayable JSON instance"""
        monkeypatch.setitem(ENUMERATED_INTERNAL, 'dunn', (lambda points, assignment: 123.0, oracles.dunn))
        data = Dataset.from_values([0, 1, 2, 10, 11, 12])
        labels = ReferenceLabels([0, 0, 0, 1, 1, 1])

        with pytest.raises(OracleMismatch) as raised:
            oracle_check(data, labels, seed=3, raise_on_mismatch=True)

        assert raised.value.check == 'dunn'
        instance = json.loads(raised.value.instance)
        assert instance['check'] == 'dunn'
        assert instance['seed'] == 3
        assert instance['points'] == [[0.0], [1.0], [2.0], [10.0], [11.0], [12.0]]
        assert instance['labels'] == [0, 0, 0, 1, 1, 1]

    def test_report_without_raising(self, monkeypatch):
        """Without raise_on_mismatch the failure is only recorded"""
        monkeypatch.setitem(ENUMERATED_INTERNAL, 'silhouette', (lambda points, assignment: -5.0, oracles.silhouette))
        data = Dataset.from_values([0, 1, 2, 10, 11, 12])
        report = oracle_check(data, ReferenceLabels([0, 0, 0, 1, 1, 1]), seed=0)

        assert not report.passed
        assert report.deviations()['silhouette'] > 1.0
        assert len(report.failures) >= 1

    @pytest.mark.slow
    def test_trials(self):
        """200 random instances up to 50 points, half on an integer grid"""
        reports = oracle_trials(max_m=50, trials=200, seed=0)
        failed = [report for report in reports if not report.passed]
        assert failed == [], failed[0].failures[:1]
        assert all(value <= TOLERANCE for name, value in worst_deviations(reports).items()
                   if name not in ('kmeans_global_min', 'kmeans_monotone', 'kmedoids_global_min'))
