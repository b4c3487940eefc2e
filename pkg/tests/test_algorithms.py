"""
Tests for the clustering algorithms, distances and SSE
"""
import numpy as np
import pytest

from sessionclust.algorithms import (
    compute_sse,
    dbscan,
    distance,
    distance_matrix,
    hierarchical,
    kmeans,
    kmedoids,
    leader,
    run_algorithm,
    squared_distance,
    technique_name,
)
from sessionclust.dataset import NOISE, Clustering, Dataset, RepresentativeKind, canonical_labels
from sessionclust.errors import AllNoise, ClusteringError, DimensionMismatch, EmptyDataset, KTooLarge

pytestmark = pytest.mark.unit

TWO_GROUPS = Dataset.from_values([0, 1, 2, 10, 11, 12])


class TestDistances:
    """Squared and plain Euclidean distance"""

    def test_three_four_five(self):
        """The 3-4-5 triangle"""
        assert squared_distance([0, 0], [3, 4]) == 25.0
        assert distance([0, 0], [3, 4]) == 5.0

    def test_dimension_mismatch(self):
        """Vectors must have the same length"""
        with pytest.raises(DimensionMismatch):
            squared_distance([0, 0], [1, 2, 3])

    def test_distance_matrix(self):
        """Symmetric with a zero diagonal"""
        matrix = distance_matrix(Dataset([[0, 0], [3, 4], [6, 8]]))
        assert matrix.shape == (3, 3)
        assert np.allclose(matrix, matrix.T)
        assert np.all(np.diag(matrix) == 0)
        assert matrix[0, 2] == 10.0


class TestDataset:
    """Dataset and Clustering validation"""

    def test_rejects_non_finite(self):
        """NaN coordinates are refused"""
        with pytest.raises(DimensionMismatch, match='finite'):
            Dataset([[0.0, np.nan]])

    def test_points_are_read_only(self):
        """The point matrix cannot be modified in place"""
        data = Dataset([[1.0, 2.0]])
        with pytest.raises(ValueError):
            data.points[0, 0] = 5.0

    def test_clustering_requires_every_id_occupied(self):
        """k counts occupied clusters only"""
        with pytest.raises(DimensionMismatch, match='occupied'):
            Clustering(assignment=[0, 0, 2], k=3)

    def test_from_labels_compacts_and_keeps_noise(self):
        """Arbitrary ids are compacted in ascending order; negatives become NOISE"""
        clustering = Clustering.from_labels([7, -3, 7, 2])
        assert clustering.assignment.tolist() == [1, NOISE, 1, 0]
        assert clustering.k == 2
        assert clustering.noise_count == 1
        assert clustering.sizes().tolist() == [1, 2]

    def test_canonical_labels(self):
        """Ids are renumbered by first appearance"""
        assert canonical_labels(np.array([5, 5, 2, 9, 2])).tolist() == [0, 0, 1, 2, 1]


class TestKMeans:
    """Lloyd iteration"""

    def test_two_groups(self):
        """Separated groups are found, J = 2 + 2"""
        result = kmeans(TWO_GROUPS, 2, seed=0, restarts=5)

        assert result.k == 2
        assert result.assignment[0] == result.assignment[1] == result.assignment[2]
        assert result.assignment[3] == result.assignment[4] == result.assignment[5]
        assert result.assignment[0] != result.assignment[3]
        assert result.objective == pytest.approx(4.0)
        assert result.kind is RepresentativeKind.CENTROID
        assert sorted(result.representatives.ravel().tolist()) == pytest.approx([1.0, 11.0])

    def test_history_non_increasing(self):
        """J never rises between iterations"""
        rng = np.random.default_rng(3)
        data = Dataset(rng.normal(size=(200, 3)))
        result = kmeans(data, 6, seed=1)

        assert len(result.history) == result.iterations
        assert all(later <= earlier + 1e-9 for earlier, later in zip(result.history, result.history[1:]))

    def test_same_seed_same_result(self):
        """Seeded runs are deterministic"""
        rng = np.random.default_rng(11)
        data = Dataset(rng.normal(size=(80, 2)))
        first = kmeans(data, 4, seed=9)
        second = kmeans(data, 4, seed=9)

        assert np.array_equal(first.assignment, second.assignment)
        assert first.objective == second.objective

    def test_restarts_never_worse(self):
        """Keeping the best of several seeds cannot raise J"""
        rng = np.random.default_rng(5)
        data = Dataset(rng.normal(size=(120, 2)))
        single = kmeans(data, 5, seed=0)
        several = kmeans(data, 5, seed=0, restarts=8)
        assert several.objective <= single.objective

    def test_k_equals_m(self):
        """Every point its own cluster gives J = 0"""
        assert kmeans(TWO_GROUPS, 6).objective == 0.0

    def test_k_too_large(self):
        """k above m is refused"""
        with pytest.raises(KTooLarge):
            kmeans(TWO_GROUPS, 7)

    def test_empty_dataset(self):
        """Zero points cannot be clustered"""
        with pytest.raises(EmptyDataset):
            kmeans(Dataset(np.zeros((0, 2))), 1)

    def test_invalid_iteration_settings(self):
        """tol and max_iter must be positive"""
        with pytest.raises(ClusteringError, match='tol'):
            kmeans(TWO_GROUPS, 2, tol=0)
        with pytest.raises(ClusteringError, match='max_iter'):
            kmeans(TWO_GROUPS, 2, max_iter=0)

    def test_max_iter_respected(self):
        """The loop stops after max_iter rounds"""
        rng = np.random.default_rng(2)
        data = Dataset(rng.normal(size=(300, 2)))
        assert kmeans(data, 10, max_iter=1).iterations == 1

    def test_duplicate_points(self):
        """Fewer distinct points than k still yields a valid clustering"""
        data = Dataset.from_values([1, 1, 1, 1, 5])
        result = kmeans(data, 3, seed=0)
        assert result.objective == 0.0
        assert 2 <= result.k <= 3


class TestKMedoids:
    """Alternating assignment and medoid update"""

    def test_two_groups(self):
        """The middle points are the medoids, J = 1 + 1 + 1 + 1"""
        result = kmedoids(TWO_GROUPS, 2, seed=0, restarts=5)

        assert sorted(result.representative_rows) == [1, 4]
        assert result.objective == pytest.approx(4.0)
        assert result.kind is RepresentativeKind.MEDOID

    def test_medoids_are_data_points(self):
        """Representatives are rows of the dataset"""
        rng = np.random.default_rng(8)
        data = Dataset(rng.normal(size=(50, 2)))
        result = kmedoids(data, 4, seed=2)
        for row, rep in zip(result.representative_rows, result.representatives):
            assert np.array_equal(data.points[row], rep)

    def test_objective_never_rises(self):
        """The recorded objective is non-increasing"""
        rng = np.random.default_rng(4)
        data = Dataset(rng.normal(size=(90, 2)))
        result = kmedoids(data, 5, seed=3)
        assert all(later <= earlier for earlier, later in zip(result.history, result.history[1:]))

    def test_k_too_large(self):
        """k above m is refused"""
        with pytest.raises(KTooLarge):
            kmedoids(TWO_GROUPS, 10)


class TestLeader:
    """Single-pass leader clustering"""

    def test_basic_scan(self):
        """Points join the first leader within alpha (squared)"""
        result = leader(Dataset.from_values([0, 0.5, 5, 5.2, 0.1]), alpha=1.0)

        assert result.assignment.tolist() == [0, 0, 1, 1, 0]
        assert result.representative_rows == (0, 2)
        assert result.objective == pytest.approx(0.25 + 0.04 + 0.01)

    def test_threshold_is_strict(self):
        """A point exactly alpha away starts a new leader"""
        assert leader(Dataset.from_values([0, 1]), alpha=1.0).k == 2

    def test_nearest_leader_wins(self):
        """Among leaders within alpha the nearest is chosen"""
        result = leader(Dataset.from_values([0, 10, 4]), alpha=50.0)
        assert result.assignment.tolist() == [0, 1, 0]

    def test_order_dependence(self):
        """Reordering the input can change the leaders"""
        forward = leader(Dataset.from_values([0, 1.5, 3]), alpha=4.0)
        backward = leader(Dataset.from_values([1.5, 0, 3]), alpha=4.0)
        assert forward.k == 2
        assert backward.k == 1

    def test_alpha_must_be_positive(self):
        """alpha <= 0 is refused"""
        with pytest.raises(ClusteringError, match='alpha'):
            leader(TWO_GROUPS, 0)


class TestHierarchical:
    """Agglomerative clustering on the proximity matrix"""

    def test_single_link(self):
        """Single link chains 0-1-2 before joining 3.4"""
        result = hierarchical(Dataset.from_values([0, 1, 2, 3.4]), 2, 'single')
        assert result.assignment.tolist() == [0, 0, 0, 1]
        assert result.merge_distances == (1.0, 1.0)

    def test_complete_link(self):
        """Complete link joins 2 with 3.4 instead"""
        result = hierarchical(Dataset.from_values([0, 1, 2, 3.4]), 2, 'complete')
        assert result.assignment.tolist() == [0, 0, 1, 1]

    def test_average_link(self):
        """Average link: mean(2, 1) = 1.5 > 1.4"""
        result = hierarchical(Dataset.from_values([0, 1, 2, 3.4]), 2, 'average')
        assert result.assignment.tolist() == [0, 0, 1, 1]

    def test_stops_at_k_target(self):
        """m - k merges leave k clusters"""
        result = hierarchical(Dataset.from_values([0, 1, 5, 6, 20]), 3, 'single')
        assert result.k == 3
        assert result.iterations == 2
        assert result.assignment.tolist() == [0, 0, 1, 1, 2]

    def test_canonical_ids(self):
        """Cluster ids follow first appearance in row order"""
        result = hierarchical(Dataset.from_values([20, 0, 1, 21]), 2, 'single')
        assert result.assignment.tolist() == [0, 1, 1, 0]

    def test_unknown_linkage(self):
        """Only single, complete and average are known"""
        with pytest.raises(ValueError):
            hierarchical(TWO_GROUPS, 2, 'ward')

    def test_k_target_one(self):
        """Merging down to one cluster"""
        assert hierarchical(TWO_GROUPS, 1).assignment.tolist() == [0] * 6


class TestDBSCAN:
    """Density-based clustering with a squared-distance radius"""

    def test_two_clusters_and_noise(self):
        """Dense runs become clusters, the loner is NOISE"""
        result = dbscan(Dataset.from_values([0, 1, 2, 10, 11, 12, 50]), eps=1.0, eta=2)

        assert result.assignment.tolist() == [0, 0, 0, 1, 1, 1, NOISE]
        assert result.k == 2
        assert result.noise_count == 1

    def test_border_points_join(self):
        """Non-core points in reach of a core point are border points"""
        result = dbscan(Dataset.from_values([0, 1, 2, 3.5]), eps=1.0, eta=3)
        assert result.assignment.tolist() == [0, 0, 0, NOISE]

    def test_all_noise(self):
        """No core points means no clusters"""
        result = dbscan(TWO_GROUPS, eps=0.5, eta=2)
        assert result.k == 0
        assert result.noise_count == 6
        with pytest.raises(AllNoise):
            compute_sse(TWO_GROUPS, result)

    def test_eta_one_makes_every_point_core(self):
        """With eta = 1 nothing is NOISE"""
        assert dbscan(TWO_GROUPS, eps=0.5, eta=1).noise_count == 0

    def test_invalid_parameters(self):
        """eps and eta must be positive"""
        with pytest.raises(ClusteringError, match='eps'):
            dbscan(TWO_GROUPS, eps=0, eta=2)
        with pytest.raises(ClusteringError, match='eta'):
            dbscan(TWO_GROUPS, eps=1, eta=0)


class TestSSE:
    """Within-cluster sum of squares"""

    def test_two_clusters(self):
        """(1 + 1) + (4 + 4)"""
        data = Dataset.from_values([0, 2, 10, 14])
        assert compute_sse(data, Clustering.from_labels([0, 0, 1, 1])) == 10.0

    def test_noise_left_out(self):
        """NOISE points do not contribute"""
        data = Dataset.from_values([0, 2, 100])
        assert compute_sse(data, Clustering.from_labels([0, 0, -1])) == 2.0

    def test_length_mismatch(self):
        """Assignment and dataset must agree on m"""
        with pytest.raises(DimensionMismatch):
            compute_sse(TWO_GROUPS, Clustering.from_labels([0, 1]))


class TestDispatch:
    """run_algorithm and technique names"""

    def test_run_by_name(self):
        """Each algorithm is reachable by its id"""
        assert run_algorithm('kmeans', TWO_GROUPS, k=2, restarts=3).k == 2
        assert run_algorithm('kmedoids', TWO_GROUPS, k=2, restarts=3).k == 2
        assert run_algorithm('leader', TWO_GROUPS, alpha=9.0).k == 2
        assert run_algorithm('hier', TWO_GROUPS, k=2, linkage='average').k == 2
        assert run_algorithm('dbscan', TWO_GROUPS, eps=1.0, eta=2).k == 2

    def test_missing_parameter(self):
        """An algorithm without its parameter is an error"""
        with pytest.raises(ClusteringError, match='needs the eps parameter'):
            run_algorithm('dbscan', TWO_GROUPS, eta=2)

    def test_technique_names(self):
        """Names used in reports"""
        assert technique_name('kmeans') == 'k-Means'
        assert technique_name('kmedoids') == 'k-Medoids'
        assert technique_name('leader') == 'Leader'
        assert technique_name('dbscan') == 'DBSCAN'
        assert technique_name('hier', 'complete') == 'Complete Link'
