"""
Labelled synthetic inputs: Gaussian blobs with ground-truth labels, and
access logs with a planted session structure.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Tuple

import numpy as np

from .dataset import Dataset, ReferenceLabels
from .errors import HarnessError
from .logs import LogEntry, format_log_line

MAX_PLACEMENT_ATTEMPTS = 10_000


@dataclass(frozen=True)
class SyntheticSpec:
    """k isotropic blobs. ``spread`` is the minimum distance between blob
    centres, ``scale`` the per-coordinate standard deviation inside a blob."""

    cluster_count: int = 3
    points_per_cluster: int = 100
    dimension: int = 2
    spread: float = 10.0
    scale: float = 1.0
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        for name in ('cluster_count', 'points_per_cluster', 'dimension', 'spread', 'scale'):
            if getattr(self, name) <= 0:
                raise HarnessError(f'SyntheticSpec.{name} must be positive')


def _place_centres(spec: SyntheticSpec, rng: np.random.Generator) -> np.ndarray:
    side = spec.spread * spec.cluster_count
    centres = []
    for _ in range(MAX_PLACEMENT_ATTEMPTS):
        if len(centres) == spec.cluster_count:
            break
        candidate = rng.uniform(0.0, side, size=spec.dimension)
        if all(np.linalg.norm(candidate - c) >= spec.spread for c in centres):
            centres.append(candidate)
    if len(centres) < spec.cluster_count:
        # Fall back to centres on a line, spread apart along the first axis.
        centres = [np.eye(1, spec.dimension, 0).ravel() * spec.spread * i
                   for i in range(spec.cluster_count)]
    return np.array(centres)


def generate_synthetic(spec: SyntheticSpec) -> Tuple[Dataset, ReferenceLabels]:
    rng = np.random.default_rng(spec.seed)
    centres = _place_centres(spec, rng)
    labels = np.repeat(np.arange(spec.cluster_count), spec.points_per_cluster)
    points = centres[labels] + rng.normal(0.0, spec.scale, size=(labels.size, spec.dimension))
    if spec.shuffle:
        order = rng.permutation(labels.size)
        points, labels = points[order], labels[order]
    return Dataset(points), ReferenceLabels(labels)


@dataclass(frozen=True)
class SyntheticLogSpec:
    users: int = 10
    sessions_per_user: int = 4
    pages_per_session: int = 20
    pages: int = 30
    image_lines: int = 100
    error_lines: int = 100
    timeout_s: float = 1800.0
    seed: int = 0


@dataclass(frozen=True)
class SyntheticLog:
    """Combined-format lines plus the structure planted in them.

    ``gaps`` lists, per session in pipeline order (users by first request,
    then time), the dwell seconds of every page but the last.
    """

    lines: Tuple[str, ...]
    session_count: int
    gaps: Tuple[Tuple[float, ...], ...]
    noise_lines: int


def generate_access_log(spec: SyntheticLogSpec) -> SyntheticLog:
    rng = np.random.default_rng(spec.seed)
    origin = datetime(2011, 2, 1, 9, 0, 0, tzinfo=timezone(timedelta(hours=5, minutes=30)))
    page_views = []
    gaps = []
    for user in range(spec.users):
        host = f'10.0.0.{user + 1}'
        agent = f'Mozilla/5.0 (X11; user {user})'
        clock = origin + timedelta(seconds=7 * user)
        for _ in range(spec.sessions_per_user):
            session_gaps = []
            for page in range(spec.pages_per_session):
                uri = f'/dept/page{int(rng.integers(spec.pages))}.html'
                page_views.append(LogEntry(host, clock, 'GET', uri, 'HTTP/1.1', 200,
                                           int(rng.integers(200, 5000)), None, agent))
                if page < spec.pages_per_session - 1:
                    gap = int(rng.integers(5, min(600, int(spec.timeout_s)) + 1))
                    session_gaps.append(float(gap))
                    clock += timedelta(seconds=gap)
            gaps.append(tuple(session_gaps))
            clock += timedelta(seconds=spec.timeout_s + int(rng.integers(60, 3600)))

    noise = []
    for i in range(spec.image_lines):
        anchor = page_views[int(rng.integers(len(page_views)))]
        noise.append(LogEntry(anchor.remote_host, anchor.timestamp, 'GET', f'/img/logo{i}.gif',
                              'HTTP/1.1', 200, 1024, None, anchor.user_agent))
    for i in range(spec.error_lines):
        anchor = page_views[int(rng.integers(len(page_views)))]
        noise.append(LogEntry(anchor.remote_host, anchor.timestamp, 'GET', f'/missing/{i}.html',
                              'HTTP/1.1', 404, 0, None, anchor.user_agent))

    entries = page_views + noise
    order = rng.permutation(len(entries))
    lines = tuple(format_log_line(entries[i]) for i in order)
    return SyntheticLog(lines=lines, session_count=len(gaps), gaps=tuple(gaps), noise_lines=len(noise))
