"""
Brute-force reference implementations and the randomized check that holds
the fast implementations to them.

Every oracle here is written from the definitions with plain Python loops
(``math.dist``, explicit pair enumeration, Kruskal's MST, exhaustive
partitions) so it shares no code path with the numpy implementations it
checks.
"""
from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .algorithms import dbscan, hierarchical, kmeans, kmedoids, leader
from .dataset import NOISE, Clustering, Dataset, ReferenceLabels, canonical_labels
from .errors import HarnessError, OracleMismatch, SessionClustError
from .validity import (
    c_index,
    davies_bouldin,
    dunn,
    fowlkes_mallows,
    jaccard_index,
    pair_counts,
    rand_index,
    silhouette,
)

logger = logging.getLogger(__name__)

EXHAUSTIVE_MAX_M = 8
EXHAUSTIVE_SEEDS = 20
CUT_MARGIN = 1e-9

Points = List[Tuple[float, ...]]


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x: int, y: int) -> bool:
        root_x, root_y = self.find(x), self.find(y)
        if root_x == root_y:
            return False
        if self.rank[root_x] < self.rank[root_y]:
            root_x, root_y = root_y, root_x
        self.parent[root_y] = root_x
        if self.rank[root_x] == self.rank[root_y]:
            self.rank[root_x] += 1
        return True


def _squared(p: Sequence[float], q: Sequence[float]) -> float:
    return math.fsum((a - b) ** 2 for a, b in zip(p, q))


def _groups(assignment: Sequence[int]) -> Dict[int, List[int]]:
    groups: Dict[int, List[int]] = {}
    for i, cluster in enumerate(assignment):
        if cluster != NOISE:
            groups.setdefault(cluster, []).append(i)
    return groups


# External indices by pair enumeration

def enumerated_pair_counts(classes: Sequence[int], assignment: Sequence[int]) -> Tuple[int, int, int, int]:
    """(a, b, c, d) by visiting every unordered pair; NOISE never shares a cluster."""
    a = b = c = d = 0
    for i, j in itertools.combinations(range(len(classes)), 2):
        same_class = classes[i] == classes[j]
        same_cluster = assignment[i] == assignment[j] and assignment[i] != NOISE
        if same_class and same_cluster:
            a += 1
        elif same_class:
            b += 1
        elif same_cluster:
            c += 1
        else:
            d += 1
    return a, b, c, d


def enumerated_external(classes: Sequence[int], assignment: Sequence[int]) -> Dict[str, Optional[float]]:
    a, b, c, d = enumerated_pair_counts(classes, assignment)
    total = a + b + c + d
    pairs = list(itertools.combinations(range(len(classes)), 2))
    same_class = {p for p in pairs if classes[p[0]] == classes[p[1]]}
    same_cluster = {p for p in pairs if assignment[p[0]] == assignment[p[1]] != NOISE}
    fm = None
    if same_class and same_cluster:
        fm = len(same_class & same_cluster) / math.sqrt(len(same_class) * len(same_cluster))
    return {
        'rand': (a + d) / total if total else None,
        'jaccard': a / (a + b + c) if a + b + c else None,
        'fowlkes_mallows': fm,
    }


# Internal indices by direct enumeration

def _diameters_and_separations(points: Points, groups: Dict[int, List[int]]) -> tuple:
    ids = sorted(groups)
    diameters = {
        g: max((math.dist(points[i], points[j]) for i, j in itertools.combinations(groups[g], 2)),
               default=0.0)
        for g in ids
    }
    separations = {
        (g, h): min(math.dist(points[i], points[j]) for i in groups[g] for j in groups[h])
        for g, h in itertools.permutations(ids, 2)
    }
    return ids, diameters, separations


def enumerated_dunn(points: Points, assignment: Sequence[int]) -> Optional[float]:
    groups = _groups(assignment)
    if len(groups) < 2:
        return None
    _, diameters, separations = _diameters_and_separations(points, groups)
    largest = max(diameters.values())
    if largest == 0:
        return None
    return min(separations.values()) / largest


def enumerated_davies_bouldin(points: Points, assignment: Sequence[int]) -> Optional[float]:
    groups = _groups(assignment)
    if len(groups) < 2:
        return None
    ids, diameters, separations = _diameters_and_separations(points, groups)
    if any(s == 0 for s in separations.values()):
        return None
    worst = [
        max((diameters[g] + diameters[h]) / separations[g, h] for h in ids if h != g)
        for g in ids
    ]
    return math.fsum(worst) / len(ids)


def enumerated_c_index(points: Points, assignment: Sequence[int]) -> Optional[float]:
    clustered = [i for i, cluster in enumerate(assignment) if cluster != NOISE]
    distances, intra = [], []
    for i, j in itertools.combinations(clustered, 2):
        d = math.dist(points[i], points[j])
        distances.append(d)
        if assignment[i] == assignment[j]:
            intra.append(d)
    if not intra:
        return None
    distances.sort()
    s_min = math.fsum(distances[:len(intra)])
    s_max = math.fsum(distances[-len(intra):])
    if s_max == s_min:
        return None
    return min(max((math.fsum(intra) - s_min) / (s_max - s_min), 0.0), 1.0)


def enumerated_silhouette(points: Points, assignment: Sequence[int]) -> Optional[float]:
    groups = _groups(assignment)
    if len(groups) < 2:
        return None
    widths = []
    for own, members in groups.items():
        for i in members:
            if len(members) == 1:
                widths.append(0.0)
                continue
            a = math.fsum(math.dist(points[i], points[j]) for j in members if j != i) / (len(members) - 1)
            b = min(
                math.fsum(math.dist(points[i], points[j]) for j in others) / len(others)
                for other, others in groups.items() if other != own
            )
            spread = max(a, b)
            widths.append((b - a) / spread if spread > 0 else 0.0)
    return math.fsum(widths) / len(widths)


ENUMERATED_INTERNAL = {
    'dunn': (enumerated_dunn, dunn),
    'davies_bouldin': (enumerated_davies_bouldin, davies_bouldin),
    'c_index': (enumerated_c_index, c_index),
    'silhouette': (enumerated_silhouette, silhouette),
}


# Single link against the minimum spanning tree

def minimum_spanning_tree(points: Points) -> List[Tuple[float, int, int]]:
    """Kruskal over all pairs; edges come out in ascending weight order."""
    edges = sorted(
        (math.dist(points[i], points[j]), i, j)
        for i, j in itertools.combinations(range(len(points)), 2)
    )
    forest = UnionFind(len(points))
    tree = []
    for weight, i, j in edges:
        if forest.union(i, j):
            tree.append((weight, i, j))
            if len(tree) == len(points) - 1:
                break
    return tree


def mst_cut_partition(points: Points, k: int) -> Tuple[List[int], List[float], bool]:
    """Partition left after removing the k-1 heaviest MST edges.

    Returns the canonical labels, the weights of the kept edges (ascending)
    and whether the cut is unambiguous: the heaviest kept edge is strictly
    lighter than the lightest removed one (by a relative CUT_MARGIN, so
    rounding in the distance computation cannot reorder them).
    """
    tree = minimum_spanning_tree(points)
    kept = tree[:len(points) - k]
    removed = tree[len(points) - k:]
    forest = UnionFind(len(points))
    for _, i, j in kept:
        forest.union(i, j)
    roots = np.array([forest.find(i) for i in range(len(points))])
    unambiguous = not kept or not removed or kept[-1][0] < removed[0][0] * (1 - CUT_MARGIN)
    return canonical_labels(roots).tolist(), [w for w, _, _ in kept], unambiguous


# DBSCAN against density closure

def density_closure_violations(points: Points, eps: float, eta: int, clustering: Clustering) -> List[str]:
    """Every way ``clustering`` departs from the density-reachability definition."""
    m = len(points)
    within = [[_squared(points[i], points[j]) <= eps for j in range(m)] for i in range(m)]
    core = [sum(row) >= eta for row in within]
    core_rows = [i for i in range(m) if core[i]]
    assignment = clustering.assignment.tolist()

    problems = []
    if core_rows:
        position = {p: idx for idx, p in enumerate(core_rows)}
        rows, cols = [], []
        for p in core_rows:
            for q in core_rows:
                if within[p][q]:
                    rows.append(position[p])
                    cols.append(position[q])
        graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(core_rows),) * 2)
        _, components = connected_components(graph, directed=False)
        expected = canonical_labels(components).tolist()
        actual = [assignment[p] for p in core_rows]
        if NOISE in actual:
            problems.append('a core point is NOISE')
        elif canonical_labels(np.array(actual)).tolist() != expected:
            problems.append('core points are not partitioned by density connectivity')

    for i in range(m):
        if core[i]:
            continue
        reaching = [p for p in core_rows if within[p][i]]
        if assignment[i] == NOISE and reaching:
            problems.append(f'point {i} is NOISE but lies within eps of core point {reaching[0]}')
        elif assignment[i] != NOISE and assignment[i] not in {assignment[p] for p in reaching}:
            problems.append(f'border point {i} joined a cluster with no core point in reach')
    return problems


# Exhaustive optima

def set_partitions(m: int, k: int) -> Iterator[Tuple[int, ...]]:
    """All partitions of range(m) into exactly k blocks as restricted growth strings."""
    def grow(prefix: List[int], blocks: int):
        if len(prefix) == m:
            if blocks == k:
                yield tuple(prefix)
            return
        if blocks + m - len(prefix) < k:
            return
        for block in range(min(blocks + 1, k)):
            yield from grow(prefix + [block], max(blocks, block + 1))

    if 1 <= k <= m:
        yield from grow([0], 1)


def partition_sse(points: Points, labels: Sequence[int]) -> float:
    total = 0.0
    for members in _groups(labels).values():
        mean = [math.fsum(points[i][d] for i in members) / len(members) for d in range(len(points[0]))]
        total += math.fsum(_squared(points[i], mean) for i in members)
    return total


def kmeans_global_minimum(points: Points, k: int) -> float:
    return min(partition_sse(points, labels) for labels in set_partitions(len(points), k))


def kmedoids_global_minimum(points: Points, k: int) -> float:
    return min(
        math.fsum(min(_squared(p, points[r]) for r in medoids) for p in points)
        for medoids in itertools.combinations(range(len(points)), k)
    )


def sequential_leader(points: Points, alpha: float) -> List[int]:
    """The one-pass Leader scan, point by point."""
    leaders: List[int] = []
    assignment = []
    for i, p in enumerate(points):
        nearest, nearest_d2 = None, math.inf
        for cluster, row in enumerate(leaders):
            d2 = _squared(p, points[row])
            if d2 < nearest_d2:
                nearest, nearest_d2 = cluster, d2
        if nearest is not None and nearest_d2 < alpha:
            assignment.append(nearest)
        else:
            leaders.append(i)
            assignment.append(len(leaders) - 1)
    return assignment


# The check itself

@dataclass
class CheckResult:
    name: str
    max_deviation: float = 0.0
    passed: bool = True
    detail: str = ''


@dataclass
class OracleReport:
    seed: int
    m: int
    checks: List[CheckResult] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def deviations(self) -> Dict[str, float]:
        return {check.name: check.max_deviation for check in self.checks}


def _deviation(expected: Optional[float], actual: Optional[float]) -> float:
    if expected is None and actual is None:
        return 0.0
    if expected is None or actual is None:
        return math.inf
    return abs(expected - actual)


def _defined(index: Callable, *args) -> Optional[float]:
    try:
        return index(*args)
    except SessionClustError:
        return None


def _midpoint_threshold(values: Sequence[float], rng: np.random.Generator, upper: float = 0.5) -> float:
    """A threshold halfway between two distinct values from the lower part of
    ``values``, so no distance sits exactly on it."""
    distinct = sorted(set(values))
    if len(distinct) < 2:
        return (distinct[0] if distinct else 0.0) + 1.0
    top = max(1, int(len(distinct) * upper))
    i = int(rng.integers(0, min(top, len(distinct) - 1)))
    return (distinct[i] + distinct[i + 1]) / 2


class _Checker:
    def __init__(self, data: Dataset, labels: ReferenceLabels, seed: int, tolerance: float):
        self.data = data
        self.labels = labels
        self.seed = seed
        self.tolerance = tolerance
        self.points: Points = [tuple(row) for row in data.points.tolist()]
        self.rng = np.random.default_rng(seed)
        self.results: Dict[str, CheckResult] = {}
        self.failures: List[str] = []

    def record(self, name: str, deviation: float, params: dict, detail: str = '',
               passed: Optional[bool] = None) -> None:
        result = self.results.setdefault(name, CheckResult(name))
        ok = deviation <= self.tolerance if passed is None else passed
        result.max_deviation = max(result.max_deviation, deviation)
        if detail:
            result.detail = detail
        if not ok:
            result.passed = False
            instance = json.dumps({
                'check': name,
                'seed': self.seed,
                'points': self.data.points.tolist(),
                'labels': self.labels.labels.tolist(),
                'params': params,
                'detail': detail,
            }, sort_keys=True)
            self.failures.append(instance)
            logger.warning('Oracle check %s failed (deviation %s): %s', name, deviation, detail)

    def clusterings(self) -> List[Tuple[str, Clustering]]:
        m = self.data.m
        k = min(max(self.labels.class_count, 2), m)
        scattered = self.rng.integers(-1, k, size=m)
        d2 = [_squared(p, q) for p, q in itertools.combinations(self.points, 2)]
        eps = _midpoint_threshold(d2, self.rng, upper=0.2)
        return [
            ('kmeans', kmeans(self.data, k, seed=self.seed)),
            ('random', Clustering.from_labels(scattered)),
            ('dbscan', dbscan(self.data, eps, 2)),
        ]

    def external(self, clusterings) -> None:
        classes = self.labels.labels.tolist()
        for source, clustering in clusterings:
            assignment = clustering.assignment.tolist()
            counts = pair_counts(self.labels, clustering)
            expected_counts = enumerated_pair_counts(classes, assignment)
            actual_counts = (counts.a, counts.b, counts.c, counts.d)
            mismatch = float(max(abs(x - y) for x, y in zip(expected_counts, actual_counts)))
            self.record('pair_counts', mismatch, {'clustering': assignment},
                        f'{source}: expected {expected_counts}, got {actual_counts}' if mismatch else '')
            expected = enumerated_external(classes, assignment)
            for name, index in (('rand', rand_index), ('jaccard', jaccard_index),
                                ('fowlkes_mallows', fowlkes_mallows)):
                deviation = _deviation(expected[name], _defined(index, counts))
                self.record(name, deviation, {'clustering': assignment},
                            f'{source}: {name} off by {deviation}' if deviation > self.tolerance else '')

    def internal(self, clusterings) -> None:
        for source, clustering in clusterings:
            assignment = clustering.assignment.tolist()
            for name, (oracle, index) in ENUMERATED_INTERNAL.items():
                deviation = _deviation(oracle(self.points, assignment), _defined(index, self.data, clustering))
                self.record(name, deviation, {'clustering': assignment},
                            f'{source}: {name} off by {deviation}' if deviation > self.tolerance else '')

    def single_link(self) -> None:
        m = self.data.m
        if m < 3:
            return
        k = int(self.rng.integers(2, min(6, m - 1) + 1))
        expected, weights, unambiguous = mst_cut_partition(self.points, k)
        result = hierarchical(self.data, k, 'single')
        merges = sorted(result.merge_distances)
        deviation = max((abs(a - b) for a, b in zip(merges, weights)), default=0.0)
        params = {'k_target': k}
        self.record('single_link_merges', deviation, params,
                    f'merge distances off by {deviation}' if deviation > self.tolerance else '')
        if not unambiguous:
            self.record('single_link_mst', 0.0, params, 'tied cut, partition not compared')
            return
        same = result.assignment.tolist() == expected
        self.record('single_link_mst', 0.0 if same else 1.0, params,
                    '' if same else 'partition differs from the MST cut')

    def density(self) -> None:
        d2 = [_squared(p, q) for p, q in itertools.combinations(self.points, 2)]
        eps = _midpoint_threshold(d2, self.rng, upper=0.3)
        eta = int(self.rng.integers(2, 6))
        problems = density_closure_violations(self.points, eps, eta, dbscan(self.data, eps, eta))
        self.record('dbscan_closure', float(len(problems)), {'eps': eps, 'eta': eta},
                    '; '.join(problems[:3]))

    def exhaustive(self) -> None:
        size = min(self.data.m, EXHAUSTIVE_MAX_M)
        subset = self.data.subset(np.arange(size))
        points = self.points[:size]
        for k in (2, 3):
            if k > size:
                continue
            scale = self.tolerance * max(1.0, partition_sse(points, [0] * size))
            best = kmeans_global_minimum(points, k)
            shortfall, climb = 0.0, 0.0
            for seed in range(self.seed, self.seed + EXHAUSTIVE_SEEDS):
                result = kmeans(subset, k, seed=seed)
                shortfall = max(shortfall, best - result.objective)
                steps = np.diff(result.history)
                climb = max(climb, float(steps.max()) if steps.size else 0.0)
            params = {'rows': size, 'k': k}
            self.record('kmeans_global_min', max(shortfall, 0.0), params,
                        f'objective {shortfall} below the exhaustive minimum' if shortfall > scale else '',
                        passed=shortfall <= scale)
            self.record('kmeans_monotone', max(climb, 0.0), params,
                        f'J rose by {climb} in one iteration' if climb > scale else '',
                        passed=climb <= scale)

            best = kmedoids_global_minimum(points, k)
            result = kmedoids(subset, k, seed=self.seed)
            shortfall = max(best - result.objective, 0.0)
            self.record('kmedoids_global_min', shortfall, params,
                        f'objective {shortfall} below the exhaustive minimum' if shortfall > scale else '',
                        passed=shortfall <= scale)

    def leader_scan(self) -> None:
        d2 = [_squared(p, q) for p, q in itertools.combinations(self.points, 2)]
        alpha = _midpoint_threshold(d2, self.rng, upper=0.5)
        expected = sequential_leader(self.points, alpha)
        actual = leader(self.data, alpha).assignment.tolist()
        wrong = sum(1 for a, b in zip(expected, actual) if a != b)
        self.record('leader_scan', float(wrong), {'alpha': alpha},
                    f'{wrong} points assigned differently' if wrong else '')

    def run(self) -> OracleReport:
        clusterings = self.clusterings()
        self.external(clusterings)
        self.internal(clusterings)
        self.single_link()
        self.density()
        self.exhaustive()
        self.leader_scan()
        return OracleReport(seed=self.seed, m=self.data.m,
                            checks=list(self.results.values()), failures=self.failures)


def oracle_check(data: Dataset, labels: ReferenceLabels, seed: int, max_m: int = 50,
                 tolerance: float = 1e-9, raise_on_mismatch: bool = False) -> OracleReport:
    """Run every brute-force oracle against the main implementations.

    Each check reports its largest absolute deviation. With
    ``raise_on_mismatch`` the first failing check raises OracleMismatch
    carrying the replayable instance.
    """
    if data.m > max_m:
        raise HarnessError(f'Oracle checks are limited to {max_m} points, got {data.m}')
    if data.m < 2:
        raise HarnessError('Oracle checks need at least 2 points')
    if labels.m != data.m:
        raise HarnessError(f'{labels.m} labels for {data.m} points')
    report = _Checker(data, labels, seed, tolerance).run()
    if raise_on_mismatch and not report.passed:
        failed = next(check for check in report.checks if not check.passed)
        raise OracleMismatch(failed.name, failed.max_deviation, report.failures[0])
    return report


def random_instance(rng: np.random.Generator, max_m: int, grid: bool) -> Tuple[Dataset, ReferenceLabels]:
    """A small random dataset with random labels. ``grid`` rounds the
    coordinates onto a few integers so ties and duplicate points show up."""
    m = int(rng.integers(3, max(max_m, 3) + 1))
    n = int(rng.integers(1, 4))
    if grid:
        points = rng.integers(0, 6, size=(m, n)).astype(float)
    else:
        points = rng.normal(0.0, 5.0, size=(m, n))
    classes = rng.integers(0, int(rng.integers(1, 5)), size=m)
    return Dataset(points), ReferenceLabels(classes)


def oracle_trials(max_m: int = 50, trials: int = 200, seed: int = 0,
                  tolerance: float = 1e-9) -> List[OracleReport]:
    """``trials`` random instances, every other one on an integer grid."""
    rng = np.random.default_rng(seed)
    reports = []
    for trial in range(trials):
        data, labels = random_instance(rng, max_m, grid=trial % 2 == 1)
        report = oracle_check(data, labels, seed + trial, max_m=max(max_m, 3), tolerance=tolerance)
        reports.append(report)
    failed = sum(1 for report in reports if not report.passed)
    logger.info('Oracle trials: %s run, %s failed', trials, failed)
    return reports


def worst_deviations(reports: Sequence[OracleReport]) -> Dict[str, float]:
    worst: Dict[str, float] = {}
    for report in reports:
        for name, deviation in report.deviations().items():
            worst[name] = max(worst.get(name, 0.0), deviation)
    return worst
