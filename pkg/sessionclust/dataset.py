"""
Data model shared by every clustering algorithm and validity index:
the m x n Dataset, the Clustering partition, reference labels, and the
CSV files they are exchanged through.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .errors import DimensionMismatch, EmptyDataset, LengthMismatch

NOISE = -1

PathLike = Union[str, Path]


@dataclass(frozen=True)
class Dataset:
    """m session points in n-dimensional URL-weight space.

    ``points`` is copied into a read-only float array. ``columns`` names the
    dimensions (the URL vocabulary for preprocessed logs, ``x0..`` otherwise).
    A Dataset may hold zero rows (vectorizing zero sessions); the clustering
    operations reject it with EmptyDataset.
    """

    points: np.ndarray
    columns: tuple = ()

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.size == 0 and points.ndim < 2:
            points = points.reshape(0, len(self.columns))
        if points.ndim != 2:
            raise DimensionMismatch(f'Dataset must be 2-dimensional, got shape {points.shape}')
        if not np.all(np.isfinite(points)):
            raise DimensionMismatch('Dataset values must be finite')
        points.setflags(write=False)
        columns = tuple(self.columns) or tuple(f'x{j}' for j in range(points.shape[1]))
        if len(columns) != points.shape[1]:
            raise DimensionMismatch(
                f'{len(columns)} column names for {points.shape[1]} dimensions'
            )
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'columns', columns)

    @classmethod
    def from_values(cls, values: Iterable[float]) -> Dataset:
        """One-dimensional dataset, one point per value."""
        return cls(np.asarray(list(values), dtype=float).reshape(-1, 1))

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def require_points(self) -> None:
        if self.m == 0 or self.n == 0:
            raise EmptyDataset(f'Dataset has shape {self.m}x{self.n}')

    def subset(self, rows: np.ndarray) -> Dataset:
        return Dataset(self.points[rows], self.columns)

    def translated(self, offset: Sequence[float]) -> Dataset:
        return Dataset(self.points + np.asarray(offset, dtype=float), self.columns)

    def scaled(self, factor: float) -> Dataset:
        return Dataset(self.points * factor, self.columns)


class RepresentativeKind(str, Enum):
    CENTROID = 'centroid'
    MEDOID = 'medoid'
    LEADER = 'leader'


@dataclass(frozen=True)
class Clustering:
    """A partition of the m points.

    ``assignment[i]`` is the cluster id of point i (0..k-1) or NOISE. Every id
    below k has at least one member, so each row of the membership matrix U
    sums to one over the clusters for every non-noise point.
    """

    assignment: np.ndarray
    k: int
    representatives: Optional[np.ndarray] = None
    kind: Optional[RepresentativeKind] = None
    representative_rows: Optional[tuple] = None
    objective: Optional[float] = None
    iterations: int = 0
    history: tuple = ()
    merge_distances: tuple = ()

    def __post_init__(self):
        assignment = np.array(self.assignment, dtype=np.int64).reshape(-1)
        if np.any((assignment < NOISE) | (assignment >= self.k)):
            raise DimensionMismatch(f'Cluster ids must lie in 0..{self.k - 1} or be NOISE')
        occupied = np.unique(assignment[assignment != NOISE])
        if occupied.size != self.k:
            raise DimensionMismatch(f'{self.k} clusters declared, {occupied.size} occupied')
        assignment.setflags(write=False)
        object.__setattr__(self, 'assignment', assignment)
        if self.representatives is not None:
            reps = np.array(self.representatives, dtype=float)
            if reps.shape[0] != self.k:
                raise DimensionMismatch(f'{reps.shape[0]} representatives for {self.k} clusters')
            reps.setflags(write=False)
            object.__setattr__(self, 'representatives', reps)

    @classmethod
    def from_labels(cls, labels: Iterable[int]) -> Clustering:
        """Build a clustering from arbitrary integer ids; negative ids are NOISE.

        Ids are compacted in ascending order, so an already-compact labelling
        keeps its ids.
        """
        labels = np.asarray(list(labels), dtype=np.int64)
        assignment = np.full(labels.shape, NOISE, dtype=np.int64)
        clustered = labels >= 0
        ids, compact = np.unique(labels[clustered], return_inverse=True)
        assignment[clustered] = compact
        return cls(assignment=assignment, k=int(ids.size))

    @property
    def m(self) -> int:
        return self.assignment.shape[0]

    @property
    def noise_mask(self) -> np.ndarray:
        return self.assignment == NOISE

    @property
    def noise_count(self) -> int:
        return int(self.noise_mask.sum())

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == cluster)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment[~self.noise_mask], minlength=self.k)


@dataclass(frozen=True)
class ReferenceLabels:
    """Class labels C an external index compares a clustering against."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.array(self.labels).reshape(-1)
        _, compact = np.unique(labels, return_inverse=True)
        compact = compact.astype(np.int64)
        compact.setflags(write=False)
        object.__setattr__(self, 'labels', compact)

    @property
    def m(self) -> int:
        return self.labels.shape[0]

    @property
    def class_count(self) -> int:
        return int(np.unique(self.labels).size)


def canonical_labels(raw: np.ndarray) -> np.ndarray:
    """Renumber cluster ids by first appearance in row order."""
    _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first, kind='stable')] = np.arange(first.size)
    return rank[inverse.reshape(-1)]


# CSV files

def load_dataset(path: PathLike) -> Dataset:
    """Read a dataset CSV: header row = dimension names, one point per row."""
    frame = pd.read_csv(path, float_precision='round_trip')
    return Dataset(frame.to_numpy(dtype=float), tuple(str(c) for c in frame.columns))


def save_dataset(data: Dataset, path: PathLike) -> None:
    pd.DataFrame(data.points, columns=list(data.columns)).to_csv(path, index=False)


def save_clustering(clustering: Clustering, path: PathLike) -> None:
    frame = pd.DataFrame({
        'point_index': np.arange(clustering.m),
        'cluster_id': clustering.assignment,
    })
    frame.to_csv(path, index=False)


def save_representatives(clustering: Clustering, columns: Sequence[str], path: PathLike) -> None:
    if clustering.representatives is None:
        raise DimensionMismatch('Clustering has no representatives')
    frame = pd.DataFrame(clustering.representatives, columns=list(columns))
    frame.insert(0, 'kind', clustering.kind.value if clustering.kind else '')
    frame.insert(0, 'cluster_id', np.arange(clustering.k))
    frame.to_csv(path, index=False)


def _read_indexed_column(path: PathLike, column: str) -> np.ndarray:
    frame = pd.read_csv(path)
    missing = {'point_index', column} - set(frame.columns)
    if missing:
        raise LengthMismatch(f'{path}: missing column(s) {sorted(missing)}')
    frame = frame.sort_values('point_index', kind='stable')
    if not np.array_equal(frame['point_index'].to_numpy(), np.arange(len(frame))):
        raise LengthMismatch(f'{path}: point_index must cover 0..m-1 exactly once')
    return frame[column].to_numpy()


def load_clustering(path: PathLike) -> Clustering:
    """Read a ``point_index,cluster_id`` file; -1 marks NOISE."""
    return Clustering.from_labels(_read_indexed_column(path, 'cluster_id').astype(np.int64))


def load_labels(path: PathLike) -> ReferenceLabels:
    """Read a ``point_index,class_id`` file."""
    return ReferenceLabels(_read_indexed_column(path, 'class_id'))


def save_labels(labels: ReferenceLabels, path: PathLike) -> None:
    pd.DataFrame({
        'point_index': np.arange(labels.m),
        'class_id': labels.labels,
    }).to_csv(path, index=False)
