"""
The five partitioning procedures: k-Means, k-Medoids, Leader, agglomerative
hierarchical clustering and DBSCAN, plus the distance helpers and the SSE
criterion they are judged by.

Distance conventions follow the formulas as written: objectives (k-Means J,
k-Medoids J), the Leader threshold and the DBSCAN neighbourhood use the
squared Euclidean distance; the medoid update, the hierarchical linkages and
the proximity matrix use the plain Euclidean distance.
"""
from __future__ import annotations

import logging
from collections import deque
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist, euclidean, pdist, sqeuclidean, squareform

from .dataset import NOISE, Clustering, Dataset, RepresentativeKind, canonical_labels
from .errors import AllNoise, ClusteringError, DimensionMismatch, KTooLarge

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 100


class Algorithm(str, Enum):
    KMEANS = 'kmeans'
    KMEDOIDS = 'kmedoids'
    LEADER = 'leader'
    HIERARCHICAL = 'hier'
    DBSCAN = 'dbscan'


class Linkage(str, Enum):
    SINGLE = 'single'
    COMPLETE = 'complete'
    AVERAGE = 'average'


def _as_vectors(x: Sequence[float], y: Sequence[float]) -> tuple:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise DimensionMismatch(f'Cannot compare vectors of shape {x.shape} and {y.shape}')
    return x, y


def squared_distance(x: Sequence[float], y: Sequence[float]) -> float:
    return float(sqeuclidean(*_as_vectors(x, y)))


def distance(x: Sequence[float], y: Sequence[float]) -> float:
    return float(euclidean(*_as_vectors(x, y)))


def distance_matrix(data: Dataset) -> np.ndarray:
    """m x m proximity matrix of unsquared Euclidean distances."""
    data.require_points()
    return squareform(pdist(data.points, 'euclidean'))


def squared_distance_matrix(data: Dataset) -> np.ndarray:
    data.require_points()
    return squareform(pdist(data.points, 'sqeuclidean'))


def _check_k(data: Dataset, k: int) -> None:
    data.require_points()
    if k < 1:
        raise ClusteringError(f'k must be at least 1, got {k}')
    if k > data.m:
        raise KTooLarge(f'k={k} exceeds the {data.m} available points')


def _check_iteration(tol: float, max_iter: int) -> None:
    if tol <= 0:
        raise ClusteringError('tol must be positive')
    if max_iter < 1:
        raise ClusteringError('max_iter must be at least 1')


def _best_of(run: Callable[[int], Clustering], seed: int, restarts: int) -> Clustering:
    if restarts < 1:
        raise ClusteringError('restarts must be at least 1')
    best = None
    for offset in range(restarts):
        candidate = run(seed + offset)
        if best is None or candidate.objective < best.objective:
            best = candidate
    return best


def _drop_empty(assignment: np.ndarray, k: int) -> tuple:
    """Compact cluster ids so that every id below the new k is occupied."""
    occupied = np.bincount(assignment, minlength=k) > 0
    if occupied.all():
        return assignment, np.arange(k)
    kept = np.flatnonzero(occupied)
    remap = np.full(k, NOISE, dtype=np.int64)
    remap[kept] = np.arange(kept.size)
    return remap[assignment], kept


# k-Means

def _cluster_means(points: np.ndarray, assignment: np.ndarray, previous: np.ndarray) -> np.ndarray:
    k = previous.shape[0]
    counts = np.bincount(assignment, minlength=k)
    sums = np.zeros_like(previous)
    np.add.at(sums, assignment, points)
    means = previous.copy()
    filled = counts > 0
    means[filled] = sums[filled] / counts[filled, None]
    return means


def _reseed_empty(points: np.ndarray, centroids: np.ndarray, assignment: np.ndarray,
                  d2: np.ndarray, empty: np.ndarray) -> np.ndarray:
    # An emptied centroid moves onto the point farthest from its own centroid.
    own = d2[np.arange(points.shape[0]), assignment]
    order = np.argsort(-own, kind='stable')
    centroids = centroids.copy()
    for cluster, row in zip(empty, order):
        centroids[cluster] = points[row]
    return centroids


def _kmeans_once(data: Dataset, k: int, seed: int, tol: float, max_iter: int) -> Clustering:
    points = data.points
    rows = np.arange(data.m)
    rng = np.random.default_rng(seed)
    centroids = points[rng.choice(data.m, size=k, replace=False)].copy()
    assignment = None
    history = []
    iterations = 0
    for iterations in range(1, max_iter + 1):
        d2 = cdist(points, centroids, 'sqeuclidean')
        labels = d2.argmin(axis=1)
        for _ in range(k):
            empty = np.setdiff1d(np.arange(k), labels)
            if empty.size == 0:
                break
            centroids = _reseed_empty(points, centroids, labels, d2, empty)
            d2 = cdist(points, centroids, 'sqeuclidean')
            labels = d2.argmin(axis=1)
        history.append(float(d2[rows, labels].sum()))
        unchanged = assignment is not None and np.array_equal(labels, assignment)
        settled = len(history) > 1 and abs(history[-2] - history[-1]) < tol
        assignment = labels
        centroids = _cluster_means(points, assignment, centroids)
        if unchanged or settled:
            break
    else:
        logger.debug('kmeans seed=%s k=%s hit max_iter=%s', seed, k, max_iter)

    assignment, kept = _drop_empty(assignment, k)
    centroids = centroids[kept]
    objective = float(((points - centroids[assignment]) ** 2).sum())
    return Clustering(
        assignment=assignment,
        k=int(kept.size),
        representatives=centroids,
        kind=RepresentativeKind.CENTROID,
        objective=objective,
        iterations=iterations,
        history=tuple(history),
    )


def kmeans(data: Dataset, k: int, seed: int = 0, tol: float = DEFAULT_TOL,
           max_iter: int = DEFAULT_MAX_ITER, restarts: int = 1) -> Clustering:
    """Lloyd iteration from k seeded-random distinct rows.

    Alternates nearest-centroid assignment (ties go to the lowest cluster id)
    with the mean update, and stops when the assignment repeats, when J moves
    by less than ``tol``, or after ``max_iter`` rounds. ``objective`` is the
    within-cluster sum of squares at the returned centroids. With
    ``restarts`` > 1 the seeds ``seed, seed+1, ...`` are tried and the lowest
    objective wins.
    """
    _check_k(data, k)
    _check_iteration(tol, max_iter)
    result = _best_of(lambda s: _kmeans_once(data, k, s, tol, max_iter), seed, restarts)
    logger.debug('kmeans k=%s seed=%s J=%.6g after %s iterations',
                 k, seed, result.objective, result.iterations)
    return result


# k-Medoids

def _update_medoids(dist: np.ndarray, assignment: np.ndarray, medoids: np.ndarray) -> np.ndarray:
    updated = medoids.copy()
    for cluster in range(medoids.size):
        members = np.flatnonzero(assignment == cluster)
        if members.size == 0:
            continue
        within = dist[np.ix_(members, members)].sum(axis=1)
        updated[cluster] = members[int(np.argmin(within))]
    return updated


def _kmedoids_once(data: Dataset, k: int, seed: int, tol: float, max_iter: int,
                   d2: np.ndarray, dist: np.ndarray) -> Clustering:
    rows = np.arange(data.m)
    rng = np.random.default_rng(seed)
    medoids = rng.choice(data.m, size=k, replace=False)
    history = []
    iterations = 0
    for iterations in range(1, max_iter + 1):
        labels = d2[:, medoids].argmin(axis=1)
        objective = float(d2[rows, medoids[labels]].sum())
        if history and objective > history[-1]:
            # The unsquared medoid update raised the squared objective: keep the previous medoids.
            medoids = previous
            break
        history.append(objective)
        assignment = labels
        if len(history) > 1 and abs(history[-2] - history[-1]) < tol:
            break
        if iterations == max_iter:
            break
        updated = _update_medoids(dist, assignment, medoids)
        if np.array_equal(updated, medoids):
            break
        previous = medoids
        medoids = updated

    assignment, kept = _drop_empty(assignment, k)
    medoids = medoids[kept]
    return Clustering(
        assignment=assignment,
        k=int(kept.size),
        representatives=data.points[medoids],
        kind=RepresentativeKind.MEDOID,
        representative_rows=tuple(int(r) for r in medoids),
        objective=float(d2[rows, medoids[assignment]].sum()),
        iterations=iterations,
        history=tuple(history),
    )


def kmedoids(data: Dataset, k: int, seed: int = 0, max_iter: int = DEFAULT_MAX_ITER,
             tol: float = DEFAULT_TOL, restarts: int = 1) -> Clustering:
    """k-Medoids by alternating assignment and medoid update.

    Assignment minimises the squared distance to the medoid; the update picks
    the member with the smallest summed unsquared distance to its co-members
    (lowest row index on ties). The two formulas disagree on squaring, so an
    update that would increase the squared objective ends the run instead.
    """
    _check_k(data, k)
    _check_iteration(tol, max_iter)
    d2 = squared_distance_matrix(data)
    dist = np.sqrt(d2)
    result = _best_of(lambda s: _kmedoids_once(data, k, s, tol, max_iter, d2, dist), seed, restarts)
    logger.debug('kmedoids k=%s seed=%s J=%.6g after %s iterations',
                 k, seed, result.objective, result.iterations)
    return result


# Leader

def leader(data: Dataset, alpha: float) -> Clustering:
    """Single pass in row order: a point joins its nearest leader when the
    squared distance is below ``alpha``, otherwise it becomes a new leader.

    Instead of looping point by point, every pending point keeps its best
    squared distance to the leaders found so far; the next leader is the
    first pending point whose best distance reaches ``alpha``. The result is
    identical to the sequential scan.
    """
    data.require_points()
    if alpha <= 0:
        raise ClusteringError('alpha must be positive')
    points = data.points
    best_d2 = cdist(points, points[:1], 'sqeuclidean').ravel()
    best_leader = np.zeros(data.m, dtype=np.int64)
    leaders = [0]
    start = 1
    while start < data.m:
        pending = np.flatnonzero(best_d2[start:] >= alpha)
        if pending.size == 0:
            break
        row = start + int(pending[0])
        leaders.append(row)
        best_leader[row] = len(leaders) - 1
        best_d2[row] = 0.0
        later = slice(row + 1, None)
        d2_new = cdist(points[later], points[row:row + 1], 'sqeuclidean').ravel()
        closer = d2_new < best_d2[later]
        best_d2[later][closer] = d2_new[closer]
        best_leader[later][closer] = len(leaders) - 1
        start = row + 1

    return Clustering(
        assignment=best_leader,
        k=len(leaders),
        representatives=points[leaders],
        kind=RepresentativeKind.LEADER,
        representative_rows=tuple(leaders),
        objective=float(best_d2.sum()),
        iterations=1,
    )


# Agglomerative hierarchical

def _merged_row(linkage: Linkage, row_i: np.ndarray, row_j: np.ndarray,
                size_i: float, size_j: float) -> np.ndarray:
    if linkage is Linkage.SINGLE:
        return np.minimum(row_i, row_j)
    if linkage is Linkage.COMPLETE:
        return np.maximum(row_i, row_j)
    return (size_i * row_i + size_j * row_j) / (size_i + size_j)


def hierarchical(data: Dataset, k_target: int, linkage: str = 'single') -> Clustering:
    """Bottom-up merging on the full proximity matrix until ``k_target`` clusters remain.

    Each round scans the whole matrix for the closest pair (first in row-major
    order on ties), merges the higher index into the lower and rewrites that
    row and column with the linkage rule; retired rows are set to infinity.
    """
    _check_k(data, k_target)
    linkage = Linkage(linkage)
    m = data.m
    proximity = distance_matrix(data).copy()
    np.fill_diagonal(proximity, np.inf)
    sizes = np.ones(m)
    owner = np.arange(m)
    merges = []
    for _ in range(m - k_target):
        i, j = divmod(int(np.argmin(proximity)), m)
        if i > j:
            i, j = j, i
        merges.append(float(proximity[i, j]))
        row = _merged_row(linkage, proximity[i], proximity[j], sizes[i], sizes[j])
        proximity[i, :] = row
        proximity[:, i] = row
        proximity[j, :] = np.inf
        proximity[:, j] = np.inf
        proximity[i, i] = np.inf
        sizes[i] += sizes[j]
        sizes[j] = 0
        owner[owner == j] = i

    return Clustering(
        assignment=canonical_labels(owner),
        k=k_target,
        iterations=len(merges),
        merge_distances=tuple(merges),
    )


# DBSCAN

def dbscan(data: Dataset, eps: float, eta: int) -> Clustering:
    """Density-based clustering with a squared-distance neighbourhood.

    ``N(p) = {q : d^2(p, q) <= eps}`` includes p itself; p is a core point
    when ``|N(p)| >= eta``. Rows are scanned in order; a cluster grows from
    each unvisited core point, and a border point belongs to the first
    cluster that reaches it. Unreached points stay NOISE.
    """
    data.require_points()
    if eps <= 0:
        raise ClusteringError('eps must be positive')
    if eta < 1:
        raise ClusteringError('eta must be a positive integer')
    within = squared_distance_matrix(data) <= eps
    core = within.sum(axis=1) >= eta
    assignment = np.full(data.m, NOISE, dtype=np.int64)
    visited = np.zeros(data.m, dtype=bool)
    clusters = 0
    for p in range(data.m):
        if visited[p]:
            continue
        visited[p] = True
        if not core[p]:
            continue
        assignment[p] = clusters
        seeds = deque(np.flatnonzero(within[p]))
        while seeds:
            q = seeds.popleft()
            if assignment[q] == NOISE:
                assignment[q] = clusters
            if visited[q]:
                continue
            visited[q] = True
            if core[q]:
                seeds.extend(np.flatnonzero(within[q]))
        clusters += 1

    logger.debug('dbscan eps=%s eta=%s: %s clusters, %s noise points',
                 eps, eta, clusters, int((assignment == NOISE).sum()))
    return Clustering(assignment=assignment, k=clusters)


# SSE

def compute_sse(data: Dataset, clustering: Clustering) -> float:
    """Sum of squared distances of clustered points to their cluster mean; NOISE is left out."""
    if clustering.m != data.m:
        raise DimensionMismatch(f'{clustering.m} assignments for {data.m} points')
    clustered = ~clustering.noise_mask
    if not clustered.any():
        raise AllNoise('Every point is NOISE')
    points = data.points[clustered]
    labels = clustering.assignment[clustered]
    means = _cluster_means(points, labels, np.zeros((clustering.k, data.n)))
    return float(((points - means[labels]) ** 2).sum())


# Dispatch

TECHNIQUE_NAMES = {
    Algorithm.KMEANS: 'k-Means',
    Algorithm.KMEDOIDS: 'k-Medoids',
    Algorithm.LEADER: 'Leader',
    Algorithm.DBSCAN: 'DBSCAN',
}


def technique_name(algorithm: str, linkage: str = 'single') -> str:
    algorithm = Algorithm(algorithm)
    if algorithm is Algorithm.HIERARCHICAL:
        return f'{Linkage(linkage).value.title()} Link'
    return TECHNIQUE_NAMES[algorithm]


def _require(value: Optional[float], name: str, algorithm: Algorithm):
    if value is None:
        raise ClusteringError(f'{algorithm.value} needs the {name} parameter')
    return value


def run_algorithm(algorithm: str, data: Dataset, *, k: Optional[int] = None,
                  alpha: Optional[float] = None, eps: Optional[float] = None,
                  eta: Optional[int] = None, linkage: str = 'single', seed: int = 0,
                  tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                  restarts: int = 1) -> Clustering:
    """Run one algorithm by name with the parameters it understands."""
    algorithm = Algorithm(algorithm)
    if algorithm is Algorithm.KMEANS:
        return kmeans(data, int(_require(k, 'k', algorithm)), seed=seed, tol=tol,
                      max_iter=max_iter, restarts=restarts)
    if algorithm is Algorithm.KMEDOIDS:
        return kmedoids(data, int(_require(k, 'k', algorithm)), seed=seed, max_iter=max_iter,
                        tol=tol, restarts=restarts)
    if algorithm is Algorithm.LEADER:
        return leader(data, float(_require(alpha, 'alpha', algorithm)))
    if algorithm is Algorithm.HIERARCHICAL:
        return hierarchical(data, int(_require(k, 'k', algorithm)), linkage=linkage)
    return dbscan(data, float(_require(eps, 'eps', algorithm)),
                  int(_require(eta, 'eta', algorithm)))
