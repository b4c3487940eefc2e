"""
Parameter sweeps over one clustering technique, timed and scored with every
validity index, and the report files they produce.
"""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from decouple import Config, RepositoryEnv, UndefinedValueError

from .algorithms import DEFAULT_MAX_ITER, DEFAULT_TOL, Algorithm, Linkage, run_algorithm, technique_name
from .dataset import Dataset, PathLike, ReferenceLabels, load_dataset, load_labels
from .errors import EmptyRows, InvalidSweepConfig
from .validity import INDEX_DIRECTIONS, full_report

logger = logging.getLogger(__name__)

REPORT_FORMATS = ('csv', 'markdown')

# Result columns in the order the comparison table prints them.
RESULT_COLUMNS = (
    'technique',
    'parameter',
    'eta',
    'clusters_found',
    'dunn',
    'db',
    'jaccard',
    'c_index',
    'rand',
    'fm',
    'silhouette',
    'sse',
    'exec_time_ms',
)

COLUMN_TITLES = {
    'technique': 'Technique',
    'parameter': 'Parameter',
    'eta': 'eta',
    'clusters_found': 'No. of Clusters',
    'dunn': "Dunn's",
    'db': 'DB',
    'jaccard': 'Jaccard',
    'c_index': 'C',
    'rand': 'Rand',
    'fm': 'Fowlkes-Mallows',
    'silhouette': 'Silhouette',
    'sse': 'SSE',
    'exec_time_ms': 'Execution Time (ms)',
}

# One series file per plotted quantity: the seven indices, SSE and time.
SERIES_QUANTITIES = ('dunn', 'db', 'jaccard', 'c_index', 'rand', 'fm', 'silhouette', 'sse', 'exec_time_ms')

# ResultRow column -> IndexReport attribute.
REPORT_FIELDS = {
    'dunn': 'dunn',
    'db': 'davies_bouldin',
    'jaccard': 'jaccard',
    'c_index': 'c_index',
    'rand': 'rand',
    'fm': 'fowlkes_mallows',
    'silhouette': 'silhouette',
    'sse': 'sse',
}

RECOMMENDING_INDICES = ('dunn', 'db', 'c_index', 'silhouette')

K_ALGORITHMS = (Algorithm.KMEANS, Algorithm.KMEDOIDS, Algorithm.HIERARCHICAL)


def float_grid(start: float, stop: float, step: float) -> Tuple[float, ...]:
    """Inclusive grid start, start+step, ..., stop (rounded to 12 places)."""
    if step <= 0:
        raise InvalidSweepConfig('Grid step must be positive')
    if stop < start:
        raise InvalidSweepConfig(f'Grid stop {stop} is below start {start}')
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 12) for i in range(count))


@dataclass(frozen=True)
class SweepCell:
    parameter: float
    eta: Optional[int] = None


@dataclass(frozen=True)
class SweepConfig:
    """One technique and the grid it is swept over.

    k-Means, k-Medoids and hierarchical sweep ``k_min..k_max``; Leader sweeps
    alpha over the float grid; DBSCAN sweeps eps over the float grid times
    eta over ``eta_min..eta_max``.
    """

    algorithm: Algorithm
    dataset: Optional[Path] = None
    labels: Optional[Path] = None
    k_min: int = 2
    k_max: int = 25
    grid_start: float = 0.5
    grid_stop: float = 3.5
    grid_step: float = 0.5
    eta_min: int = 2
    eta_max: int = 10
    linkage: Linkage = Linkage.SINGLE
    seed: int = 0
    repetitions: int = 5
    restarts: int = 1
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    jobs: int = 1
    output: Optional[Path] = None
    series_dir: Optional[Path] = None
    format: str = 'csv'

    def __post_init__(self):
        try:
            object.__setattr__(self, 'algorithm', Algorithm(self.algorithm))
            object.__setattr__(self, 'linkage', Linkage(self.linkage))
        except ValueError as exc:
            raise InvalidSweepConfig(str(exc)) from exc
        if self.k_min < 2 or self.k_max < self.k_min:
            raise InvalidSweepConfig(f'k range {self.k_min}..{self.k_max} must start at 2 or above')
        if self.eta_min < 1 or self.eta_max < self.eta_min:
            raise InvalidSweepConfig(f'eta range {self.eta_min}..{self.eta_max} is empty')
        for name in ('repetitions', 'restarts', 'max_iter', 'jobs'):
            if getattr(self, name) < 1:
                raise InvalidSweepConfig(f'{name} must be at least 1')
        if self.tol <= 0:
            raise InvalidSweepConfig('tol must be positive')
        if self.format not in REPORT_FORMATS:
            raise InvalidSweepConfig(f'Unknown report format {self.format!r}')
        if self.algorithm in (Algorithm.LEADER, Algorithm.DBSCAN):
            float_grid(self.grid_start, self.grid_stop, self.grid_step)

    @property
    def technique(self) -> str:
        return technique_name(self.algorithm, self.linkage)

    def cells(self) -> List[SweepCell]:
        if self.algorithm in K_ALGORITHMS:
            return [SweepCell(float(k)) for k in range(self.k_min, self.k_max + 1)]
        grid = float_grid(self.grid_start, self.grid_stop, self.grid_step)
        if self.algorithm is Algorithm.LEADER:
            return [SweepCell(alpha) for alpha in grid]
        return [SweepCell(eps, eta) for eps in grid for eta in range(self.eta_min, self.eta_max + 1)]

    def validate_for(self, m: int) -> None:
        if self.algorithm in K_ALGORITHMS and self.k_max > m:
            raise InvalidSweepConfig(f'k_max={self.k_max} exceeds the {m} points of the dataset')


def _resolve(base: Path, value: str) -> Optional[Path]:
    if not value:
        return None
    path = Path(value)
    return path if path.is_absolute() else base / path


def load_sweep_config(path: PathLike, defaults: Optional[Mapping] = None) -> SweepConfig:
    """Read a ``SWEEP_*`` KEY=VALUE file; environment variables win over the file.

    ``defaults`` supplies SWEEP_REPETITIONS, SWEEP_JOBS, KMEANS_TOL and
    MAX_ITER for keys the file leaves out. Relative paths are taken relative
    to the file's directory.
    """
    path = Path(path)
    defaults = defaults or {}
    try:
        config = Config(RepositoryEnv(str(path)))
    except OSError as exc:
        raise InvalidSweepConfig(f'Cannot read sweep config {path}: {exc}') from exc
    base = path.parent
    try:
        return SweepConfig(
            algorithm=config('SWEEP_ALGORITHM'),
            dataset=_resolve(base, config('SWEEP_DATASET', default='')),
            labels=_resolve(base, config('SWEEP_LABELS', default='')),
            k_min=config('SWEEP_K_MIN', default=2, cast=int),
            k_max=config('SWEEP_K_MAX', default=25, cast=int),
            grid_start=config('SWEEP_GRID_START', default=0.5, cast=float),
            grid_stop=config('SWEEP_GRID_STOP', default=3.5, cast=float),
            grid_step=config('SWEEP_GRID_STEP', default=0.5, cast=float),
            eta_min=config('SWEEP_ETA_MIN', default=2, cast=int),
            eta_max=config('SWEEP_ETA_MAX', default=10, cast=int),
            linkage=config('SWEEP_LINKAGE', default='single'),
            seed=config('SWEEP_SEED', default=0, cast=int),
            repetitions=config('SWEEP_REPETITIONS', default=defaults.get('SWEEP_REPETITIONS', 5), cast=int),
            restarts=config('SWEEP_RESTARTS', default=1, cast=int),
            tol=config('SWEEP_TOL', default=defaults.get('KMEANS_TOL', DEFAULT_TOL), cast=float),
            max_iter=config('SWEEP_MAX_ITER', default=defaults.get('MAX_ITER', DEFAULT_MAX_ITER), cast=int),
            jobs=config('SWEEP_JOBS', default=defaults.get('SWEEP_JOBS', 1), cast=int),
            output=_resolve(base, config('SWEEP_OUTPUT', default='')),
            series_dir=_resolve(base, config('SWEEP_SERIES_DIR', default='')),
            format=config('SWEEP_FORMAT', default='csv'),
        )
    except UndefinedValueError as exc:
        raise InvalidSweepConfig(f'{path}: {exc}') from exc
    except ValueError as exc:
        if isinstance(exc, InvalidSweepConfig):
            raise
        raise InvalidSweepConfig(f'{path}: {exc}') from exc


@dataclass(frozen=True)
class ResultRow:
    technique: str
    parameter: float
    eta: Optional[int]
    clusters_found: int
    dunn: Optional[float]
    db: Optional[float]
    jaccard: Optional[float]
    c_index: Optional[float]
    rand: Optional[float]
    fm: Optional[float]
    silhouette: Optional[float]
    sse: Optional[float]
    exec_time_ms: float

    def without_timing(self) -> dict:
        values = asdict(self)
        values.pop('exec_time_ms')
        return values


def _cell_params(config: SweepConfig, cell: SweepCell) -> dict:
    params = dict(seed=config.seed, tol=config.tol, max_iter=config.max_iter,
                  restarts=config.restarts, linkage=config.linkage.value)
    if config.algorithm in K_ALGORITHMS:
        params['k'] = int(cell.parameter)
    elif config.algorithm is Algorithm.LEADER:
        params['alpha'] = cell.parameter
    else:
        params['eps'] = cell.parameter
        params['eta'] = cell.eta
    return params


def run_cell(config: SweepConfig, data: Dataset, labels: Optional[ReferenceLabels],
             cell: SweepCell) -> ResultRow:
    """Cluster ``repetitions`` times, keep the median wall clock of the
    clustering call, then score the (deterministic) result."""
    params = _cell_params(config, cell)
    timings = []
    clustering = None
    for _ in range(config.repetitions):
        started = time.perf_counter()
        clustering = run_algorithm(config.algorithm, data, **params)
        timings.append((time.perf_counter() - started) * 1000.0)

    report = full_report(data, clustering, labels)
    values = {column: getattr(report, attr) for column, attr in REPORT_FIELDS.items()}
    row = ResultRow(
        technique=config.technique,
        parameter=float(cell.parameter),
        eta=cell.eta,
        clusters_found=clustering.k,
        exec_time_ms=float(np.median(timings)),
        **values,
    )
    logger.info('%s parameter=%s eta=%s: %s clusters in %.3f ms',
                row.technique, row.parameter, row.eta, row.clusters_found, row.exec_time_ms)
    if report.reasons:
        logger.debug('%s parameter=%s undefined indices: %s', row.technique, row.parameter, report.reasons)
    return row


def run_sweep(config: SweepConfig, data: Optional[Dataset] = None,
              labels: Optional[ReferenceLabels] = None) -> List[ResultRow]:
    """One ResultRow per grid cell, in grid order.

    ``data`` and ``labels`` default to the files named by the config.
    """
    if data is None:
        if config.dataset is None:
            raise InvalidSweepConfig('No dataset given')
        data = load_dataset(config.dataset)
    if labels is None and config.labels is not None:
        labels = load_labels(config.labels)
    data.require_points()
    if labels is not None and labels.m != data.m:
        raise InvalidSweepConfig(f'{labels.m} labels for {data.m} points')
    config.validate_for(data.m)

    cells = config.cells()
    logger.info('Sweeping %s over %s cells (m=%s, n=%s, jobs=%s)',
                config.technique, len(cells), data.m, data.n, config.jobs)
    if config.jobs == 1:
        return [run_cell(config, data, labels, cell) for cell in cells]
    logger.warning('Running %s cells concurrently; execution times are less reliable', config.jobs)
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        return list(pool.map(lambda cell: run_cell(config, data, labels, cell), cells))


# Reports

def rows_frame(rows: Sequence[ResultRow]) -> pd.DataFrame:
    if not rows:
        raise EmptyRows('No result rows to report')
    frame = pd.DataFrame([asdict(row) for row in rows], columns=list(RESULT_COLUMNS))
    frame['eta'] = frame['eta'].astype('Int64')
    for column in RESULT_COLUMNS[4:]:
        frame[column] = pd.to_numeric(frame[column])
    return frame


def _markdown_cell(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)) or value is pd.NA:
        return '-'
    if isinstance(value, float):
        return f'{value:.6g}'
    return str(value)


def _markdown_table(frame: pd.DataFrame) -> str:
    header = [COLUMN_TITLES[column] for column in frame.columns]
    lines = [
        '| ' + ' | '.join(header) + ' |',
        '|' + '|'.join('---' for _ in header) + '|',
    ]
    for record in frame.astype(object).itertuples(index=False):
        lines.append('| ' + ' | '.join(_markdown_cell(value) for value in record) + ' |')
    return '\n'.join(lines) + '\n'


def series_frames(frame: pd.DataFrame) -> Dict[str, pd.DataFrame]:
    """Index value against cluster count, one column per technique.

    When several cells of a technique report the same cluster count (Leader
    and DBSCAN grids) the first one in grid order is plotted.
    """
    techniques = list(dict.fromkeys(frame['technique']))
    first = frame.drop_duplicates(['technique', 'clusters_found'], keep='first')
    series = {}
    for quantity in SERIES_QUANTITIES:
        table = first.pivot(index='clusters_found', columns='technique', values=quantity)
        table = table.reindex(columns=techniques).sort_index()
        table.index.name = 'k'
        table.columns.name = None
        series[quantity] = table
    return series


def emit_report(rows: Sequence[ResultRow], path: PathLike, format: str = 'csv',
                series_dir: Optional[PathLike] = None) -> List[Path]:
    """Write the result table and, with ``series_dir``, one series file per quantity.

    Returns the paths written.
    """
    if format not in REPORT_FORMATS:
        raise InvalidSweepConfig(f'Unknown report format {format!r}')
    frame = rows_frame(rows)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if format == 'csv':
        frame.to_csv(path, index=False)
    else:
        path.write_text(_markdown_table(frame))
    written = [path]

    if series_dir is not None:
        series_dir = Path(series_dir)
        series_dir.mkdir(parents=True, exist_ok=True)
        for quantity, table in series_frames(frame).items():
            target = series_dir / f'series_{quantity}.csv'
            table.to_csv(target)
            written.append(target)
    logger.info('Wrote %s rows to %s (%s extra series files)', len(rows), path, len(written) - 1)
    return written


def _optional(value):
    if value is None or value is pd.NA:
        return None
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def parse_report(path: PathLike) -> List[ResultRow]:
    """Read back a CSV written by emit_report."""
    frame = pd.read_csv(path, float_precision='round_trip',
                        dtype={'technique': str, 'eta': 'Int64', 'clusters_found': int})
    missing = set(RESULT_COLUMNS) - set(frame.columns)
    if missing:
        raise InvalidSweepConfig(f'{path}: missing column(s) {sorted(missing)}')
    rows = []
    for record in frame.astype(object).to_dict('records'):
        eta = _optional(record['eta'])
        values = {name: _optional(record[name]) for name in REPORT_FIELDS}
        rows.append(ResultRow(
            technique=record['technique'],
            parameter=float(record['parameter']),
            eta=None if eta is None else int(eta),
            clusters_found=int(record['clusters_found']),
            exec_time_ms=float(record['exec_time_ms']),
            **{name: None if value is None else float(value) for name, value in values.items()},
        ))
    return rows


def recommend_k(rows: Sequence[ResultRow]) -> Dict[str, Dict[str, Optional[int]]]:
    """Per technique, the cluster count each internal index picks as optimal.

    Dunn and Silhouette pick their maximum, DB and C their minimum; ties go
    to the earliest row. An index with no defined value yields None.
    """
    if not rows:
        raise EmptyRows('No result rows to recommend from')
    recommendations: Dict[str, Dict[str, Optional[int]]] = {}
    for technique in dict.fromkeys(row.technique for row in rows):
        own = [row for row in rows if row.technique == technique]
        picks = {}
        for name in RECOMMENDING_INDICES:
            sign = 1 if INDEX_DIRECTIONS[REPORT_FIELDS[name]] == 'max' else -1
            best = None
            for row in own:
                value = getattr(row, name)
                if value is not None and (best is None or sign * value > sign * getattr(best, name)):
                    best = row
            picks[name] = None if best is None else best.clusters_found
        recommendations[technique] = picks
    return recommendations

