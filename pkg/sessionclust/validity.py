"""
Cluster validity indices.

Internal indices (Dunn, Davies-Bouldin, C-index, Silhouette, SSE) look only
at the geometry of a clustering and ignore NOISE points. External indices
(Rand, Jaccard, Fowlkes-Mallows) compare a clustering with reference class
labels through pair counts; there every NOISE point counts as a singleton
cluster so all m points take part.

All index formulas use the unsquared Euclidean distance. SSE is the k-Means
criterion and uses squared distances.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional

import numpy as np
import pandas as pd

from .algorithms import compute_sse, distance_matrix
from .dataset import Clustering, Dataset, PathLike, ReferenceLabels
from .errors import (
    ClusteringError,
    DegenerateDiameter,
    DegenerateSpread,
    IndexUndefined,
    LengthMismatch,
    NoIntraPairs,
    NoPairs,
    TooFewClusters,
    Undefined,
    ZeroSeparation,
)

INDEX_NAMES = (
    'dunn',
    'davies_bouldin',
    'c_index',
    'silhouette',
    'rand',
    'jaccard',
    'fowlkes_mallows',
    'sse',
)

# Which way each index improves.
INDEX_DIRECTIONS = {
    'dunn': 'max',
    'davies_bouldin': 'min',
    'c_index': 'min',
    'silhouette': 'max',
    'rand': 'max',
    'jaccard': 'max',
    'fowlkes_mallows': 'max',
    'sse': 'min',
}


@dataclass(frozen=True)
class PairCounts:
    """Pair agreement between class labels C and clusters K.

    a: same class, same cluster; b: same class, different clusters;
    c: different classes, same cluster; d: different in both.
    """

    a: int
    b: int
    c: int
    d: int

    @property
    def total(self) -> int:
        return self.a + self.b + self.c + self.d


@dataclass
class IndexReport:
    dunn: Optional[float] = None
    davies_bouldin: Optional[float] = None
    c_index: Optional[float] = None
    silhouette: Optional[float] = None
    rand: Optional[float] = None
    jaccard: Optional[float] = None
    fowlkes_mallows: Optional[float] = None
    sse: Optional[float] = None
    reasons: Dict[str, str] = field(default_factory=dict)

    def values(self) -> Dict[str, Optional[float]]:
        return {name: getattr(self, name) for name in INDEX_NAMES}

    def as_dict(self) -> dict:
        return asdict(self)

    def frame(self) -> pd.DataFrame:
        """One row per index: value (blank when undefined) and the reason it is undefined."""
        return pd.DataFrame({
            'index': list(INDEX_NAMES),
            'value': [getattr(self, name) for name in INDEX_NAMES],
            'reason': [self.reasons.get(name, '') for name in INDEX_NAMES],
        })


def save_index_report(report: IndexReport, path: PathLike) -> None:
    report.frame().to_csv(path, index=False)


def _clustered_geometry(data: Dataset, clustering: Clustering) -> tuple:
    """Distance matrix and labels of the non-noise points."""
    if clustering.m != data.m:
        raise LengthMismatch(f'{clustering.m} assignments for {data.m} points')
    keep = ~clustering.noise_mask
    labels = clustering.assignment[keep]
    return distance_matrix(data.subset(keep)), labels


def _require_clusters(clustering: Clustering) -> None:
    if clustering.k < 2:
        raise TooFewClusters(f'Index needs at least 2 clusters, got {clustering.k}')


def cluster_diameters(dist: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    """Largest pairwise distance inside each cluster (0 for singletons)."""
    diameters = np.zeros(k)
    for cluster in range(k):
        members = np.flatnonzero(labels == cluster)
        diameters[cluster] = dist[np.ix_(members, members)].max()
    return diameters


def cluster_separations(dist: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    """k x k matrix of smallest inter-cluster point distances; infinite diagonal."""
    members = [np.flatnonzero(labels == cluster) for cluster in range(k)]
    separation = np.full((k, k), np.inf)
    for i in range(k):
        for j in range(i + 1, k):
            separation[i, j] = separation[j, i] = dist[np.ix_(members[i], members[j])].min()
    return separation


def dunn(data: Dataset, clustering: Clustering) -> float:
    """Smallest inter-cluster distance over the largest cluster diameter."""
    _require_clusters(clustering)
    dist, labels = _clustered_geometry(data, clustering)
    largest = cluster_diameters(dist, labels, clustering.k).max()
    if largest == 0:
        raise DegenerateDiameter('Every cluster has diameter 0')
    return float(cluster_separations(dist, labels, clustering.k).min() / largest)


def davies_bouldin(data: Dataset, clustering: Clustering) -> float:
    """Mean over clusters of the worst (diam_i + diam_j) / dist(c_i, c_j).

    dist is the smallest point-to-point distance between the two clusters,
    the same quantity the Dunn index uses.
    """
    _require_clusters(clustering)
    dist, labels = _clustered_geometry(data, clustering)
    k = clustering.k
    diameters = cluster_diameters(dist, labels, k)
    separation = cluster_separations(dist, labels, k)
    if np.any(separation == 0):
        raise ZeroSeparation('Two clusters share a point position')
    ratios = (diameters[:, None] + diameters[None, :]) / separation
    np.fill_diagonal(ratios, -np.inf)
    return float(ratios.max(axis=1).mean())


def c_index(data: Dataset, clustering: Clustering) -> float:
    """(S - S_min) / (S_max - S_min) over the m' intra-cluster pairs."""
    dist, labels = _clustered_geometry(data, clustering)
    upper = np.triu_indices(labels.size, 1)
    pair_distances = dist[upper]
    intra = labels[upper[0]] == labels[upper[1]]
    intra_pairs = int(intra.sum())
    if intra_pairs == 0:
        raise NoIntraPairs('No two points share a cluster')
    ordered = np.sort(pair_distances)
    s_min = ordered[:intra_pairs].sum()
    s_max = ordered[-intra_pairs:].sum()
    if s_max == s_min:
        raise DegenerateSpread('All pair distances are equal')
    value = (pair_distances[intra].sum() - s_min) / (s_max - s_min)
    return float(min(max(value, 0.0), 1.0))


def silhouette_samples(data: Dataset, clustering: Clustering) -> np.ndarray:
    """Silhouette width of every point; NaN for NOISE, 0 for singleton clusters."""
    _require_clusters(clustering)
    dist, labels = _clustered_geometry(data, clustering)
    k = clustering.k
    rows = np.arange(labels.size)
    membership = np.zeros((labels.size, k))
    membership[rows, labels] = 1.0
    sums = dist @ membership
    counts = membership.sum(axis=0)
    own_count = counts[labels]
    shared = own_count > 1

    a = np.zeros(labels.size)
    a[shared] = sums[rows, labels][shared] / (own_count[shared] - 1)
    means = sums / counts
    means[rows, labels] = np.inf
    b = means.min(axis=1)

    widths = np.zeros(labels.size)
    spread = np.maximum(a, b)
    defined = shared & (spread > 0)
    widths[defined] = (b[defined] - a[defined]) / spread[defined]

    samples = np.full(clustering.m, np.nan)
    samples[~clustering.noise_mask] = widths
    return samples


def cluster_silhouettes(data: Dataset, clustering: Clustering) -> np.ndarray:
    """Average silhouette width of each cluster."""
    samples = silhouette_samples(data, clustering)
    return np.array([samples[clustering.members(c)].mean() for c in range(clustering.k)])


def silhouette(data: Dataset, clustering: Clustering) -> float:
    """Overall average silhouette width."""
    return float(np.nanmean(silhouette_samples(data, clustering)))


def _comb2(counts: np.ndarray) -> int:
    counts = counts.astype(np.int64)
    return int((counts * (counts - 1) // 2).sum())


def pair_counts(labels: ReferenceLabels, clustering: Clustering) -> PairCounts:
    if labels.m != clustering.m:
        raise LengthMismatch(f'{labels.m} labels for {clustering.m} points')
    clusters = clustering.assignment.copy()
    noise = clustering.noise_mask
    clusters[noise] = clustering.k + np.arange(int(noise.sum()))
    table = np.zeros((labels.class_count, clustering.k + int(noise.sum())), dtype=np.int64)
    np.add.at(table, (labels.labels, clusters), 1)

    a = _comb2(table)
    same_class = _comb2(table.sum(axis=1))
    same_cluster = _comb2(table.sum(axis=0))
    total = clustering.m * (clustering.m - 1) // 2
    b = same_class - a
    c = same_cluster - a
    return PairCounts(a=a, b=b, c=c, d=total - a - b - c)


def rand_index(pc: PairCounts) -> float:
    if pc.total == 0:
        raise NoPairs('Rand index needs at least two points')
    return (pc.a + pc.d) / pc.total


def jaccard_index(pc: PairCounts) -> float:
    if pc.a + pc.b + pc.c == 0:
        raise Undefined('Jaccard index undefined: no pair shares a class or a cluster')
    return pc.a / (pc.a + pc.b + pc.c)


def fowlkes_mallows(pc: PairCounts) -> float:
    """Geometric mean of P(C,K) = a/(a+b) and P(K,C) = a/(a+c)."""
    if pc.a + pc.b == 0 or pc.a + pc.c == 0:
        raise Undefined('Fowlkes-Mallows undefined: no same-class or no same-cluster pairs')
    return math.sqrt((pc.a / (pc.a + pc.b)) * (pc.a / (pc.a + pc.c)))


INTERNAL_INDICES = {
    'dunn': dunn,
    'davies_bouldin': davies_bouldin,
    'c_index': c_index,
    'silhouette': silhouette,
    'sse': compute_sse,
}

EXTERNAL_INDICES = {
    'rand': rand_index,
    'jaccard': jaccard_index,
    'fowlkes_mallows': fowlkes_mallows,
}


def full_report(data: Dataset, clustering: Clustering,
                labels: Optional[ReferenceLabels] = None) -> IndexReport:
    """Every index at once. An index that is undefined for this clustering
    is left as None with the reason recorded."""
    report = IndexReport()
    for name, index in INTERNAL_INDICES.items():
        try:
            setattr(report, name, index(data, clustering))
        except (IndexUndefined, ClusteringError) as exc:
            report.reasons[name] = f'{type(exc).__name__}: {exc}'

    if labels is None:
        return report
    try:
        counts = pair_counts(labels, clustering)
    except IndexUndefined as exc:
        for name in EXTERNAL_INDICES:
            report.reasons[name] = f'{type(exc).__name__}: {exc}'
        return report
    for name, index in EXTERNAL_INDICES.items():
        try:
            setattr(report, name, index(counts))
        except IndexUndefined as exc:
            report.reasons[name] = f'{type(exc).__name__}: {exc}'
    return report
