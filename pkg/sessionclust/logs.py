"""
Web access-log preprocessing: parse NCSA Common/Combined lines, clean them,
identify users, cut sessions and map every session to a vector of per-URL
dwell times.
"""
from __future__ import annotations

import functools
import logging
import re
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .dataset import Dataset, save_dataset
from .errors import BadStatus, BadTimestamp, MalformedLine, UnknownUrl

logger = logging.getLogger(__name__)

TIMESTAMP_FORMAT = '%d/%b/%Y:%H:%M:%S %z'

DEFAULT_TIMEOUT_S = 30 * 60.0
DEFAULT_LAST_DWELL_S = 60.0

_QUOTED = r'"((?:[^"\\]|\\.)*)"'
_COMMON = r'(\S+) (\S+) (\S+) \[([^\]]*)\] ' + _QUOTED + r' (\S+) (\S+)'
_COMMON_RE = re.compile('^' + _COMMON + '$')
_COMBINED_RE = re.compile('^' + _COMMON + ' ' + _QUOTED + ' ' + _QUOTED + '$')
_ESCAPED = re.compile(r'\\(.)')


class LogFormat(str, Enum):
    COMMON = 'common'
    COMBINED = 'combined'


class Weighting(str, Enum):
    DWELL = 'dwell'
    BINARY = 'binary'


@dataclass(frozen=True)
class LogEntry:
    remote_host: str
    timestamp: datetime
    method: str
    uri: str
    protocol: str
    status: int
    bytes: int
    referrer: Optional[str] = None
    user_agent: Optional[str] = None

    def sort_key(self) -> tuple:
        return (
            self.timestamp,
            self.uri,
            self.method,
            self.status,
            self.bytes,
            self.referrer or '',
            self.user_agent or '',
        )


def _unescape(text: str) -> str:
    return _ESCAPED.sub(r'\1', text)


def _escape(text: str) -> str:
    return text.replace('\\', '\\\\').replace('"', '\\"')


def _optional(text: str) -> Optional[str]:
    text = _unescape(text)
    return None if text == '-' else text


def parse_log_line(line: str, format: str = LogFormat.COMBINED) -> LogEntry:
    """Parse one Common (``%h %l %u [%t] "%r" %>s %b``) or Combined
    (plus quoted referrer and user agent) log record."""
    log_format = LogFormat(format)
    line = line.rstrip('\r\n')
    pattern = _COMBINED_RE if log_format is LogFormat.COMBINED else _COMMON_RE
    match = pattern.match(line)
    if match is None:
        raise MalformedLine(f'Not a {log_format.value} log record', field='line', line=line)
    groups = match.groups()
    host, _ident, _user, raw_time, request, raw_status, raw_bytes = groups[:7]

    try:
        timestamp = datetime.strptime(raw_time, TIMESTAMP_FORMAT)
    except ValueError:
        raise BadTimestamp(f'Unparseable timestamp {raw_time!r}', field='timestamp', line=line) from None

    parts = _unescape(request).split(' ')
    if len(parts) != 3 or not all(parts):
        raise MalformedLine(f'Request {request!r} is not "METHOD URI PROTOCOL"', field='request', line=line)
    method, uri, protocol = parts

    try:
        status = int(raw_status)
    except ValueError:
        raise BadStatus(f'Status {raw_status!r} is not an integer', field='status', line=line) from None
    if not 100 <= status <= 599:
        raise BadStatus(f'Status {status} outside 100..599', field='status', line=line)

    if raw_bytes == '-':
        size = 0
    elif raw_bytes.isdigit():
        size = int(raw_bytes)
    else:
        raise MalformedLine(f'Byte count {raw_bytes!r} is not a non-negative integer', field='bytes', line=line)

    referrer = user_agent = None
    if log_format is LogFormat.COMBINED:
        referrer, user_agent = _optional(groups[7]), _optional(groups[8])

    return LogEntry(
        remote_host=host,
        timestamp=timestamp,
        method=method,
        uri=uri,
        protocol=protocol,
        status=status,
        bytes=size,
        referrer=referrer,
        user_agent=user_agent,
    )


def format_log_line(entry: LogEntry, format: str = LogFormat.COMBINED) -> str:
    """Serialize an entry back into a log record that parse_log_line reads.

    A missing referrer or user agent is written as ``-``, the log formats'
    marker for an absent field, so a field whose text is literally ``-``
    reads back as None.
    """
    line = '{host} - - [{time}] "{request}" {status} {size}'.format(
        host=entry.remote_host,
        time=entry.timestamp.strftime(TIMESTAMP_FORMAT),
        request=_escape(f'{entry.method} {entry.uri} {entry.protocol}'),
        status=entry.status,
        size=entry.bytes,
    )
    if LogFormat(format) is LogFormat.COMBINED:
        referrer = _escape(entry.referrer) if entry.referrer is not None else '-'
        agent = _escape(entry.user_agent) if entry.user_agent is not None else '-'
        line += f' "{referrer}" "{agent}"'
    return line


def read_log_file(path: Union[str, Path], format: str = LogFormat.COMBINED) -> Tuple[List[LogEntry], int]:
    """Parse every line of a log file; malformed lines are skipped and counted."""
    entries = []
    skipped = 0
    with open(path, encoding='utf-8', errors='replace') as handle:
        for number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                entries.append(parse_log_line(line, format))
            except (MalformedLine, BadTimestamp, BadStatus) as exc:
                skipped += 1
                logger.warning('%s:%d skipped: %s', path, number, exc)
    return entries, skipped


# Cleaning

DEFAULT_EXCLUDED_SUFFIXES = ('.gif', '.jpg', '.jpeg', '.png', '.css', '.js', '.ico')
DEFAULT_ROBOT_PATTERNS = (
    r'bot\b',
    r'crawl',
    r'spider',
    r'slurp',
    r'archiver',
    r'robot',
)


@dataclass(frozen=True)
class CleanRules:
    excluded_suffixes: Tuple[str, ...] = DEFAULT_EXCLUDED_SUFFIXES
    min_status: int = 200
    max_status: int = 399
    robot_patterns: Tuple[str, ...] = DEFAULT_ROBOT_PATTERNS


@functools.lru_cache(maxsize=32)
def _robot_regex(patterns: Tuple[str, ...]) -> Optional[re.Pattern]:
    if not patterns:
        return None
    return re.compile('|'.join(f'(?:{p})' for p in patterns), re.IGNORECASE)


def normalize_uri(uri: str, strip_query: bool = True) -> str:
    if strip_query:
        uri = uri.split('#', 1)[0].split('?', 1)[0]
    return uri


def removal_reasons(entry: LogEntry, rules: CleanRules) -> List[str]:
    """Names of the cleaning rules an entry violates."""
    reasons = []
    path = normalize_uri(entry.uri).lower()
    if path.endswith(tuple(s.lower() for s in rules.excluded_suffixes)):
        reasons.append('suffix')
    if not rules.min_status <= entry.status <= rules.max_status:
        reasons.append('status')
    robots = _robot_regex(tuple(rules.robot_patterns))
    if robots is not None and entry.user_agent and robots.search(entry.user_agent):
        reasons.append('robot')
    return reasons


def clean_entries(entries: Sequence[LogEntry], rules: CleanRules = CleanRules()) -> List[LogEntry]:
    kept = [entry for entry in entries if not removal_reasons(entry, rules)]
    logger.debug('cleaning kept %d of %d entries', len(kept), len(entries))
    return kept


# Users and sessions

class UserKey(NamedTuple):
    remote_host: str
    user_agent: Optional[str]

    def __str__(self) -> str:
        return f'{self.remote_host}|{self.user_agent or "-"}'


class PageView(NamedTuple):
    uri: str
    dwell_seconds: float


@dataclass(frozen=True)
class Session:
    user_id: UserKey
    entries: Tuple[PageView, ...]
    started_at: Optional[datetime] = None

    def __post_init__(self):
        if not self.entries:
            raise ValueError('A session needs at least one page view')
        if any(view.dwell_seconds < 0 for view in self.entries):
            raise ValueError('Dwell times must be non-negative')


def identify_users(entries: Iterable[LogEntry]) -> Dict[UserKey, List[LogEntry]]:
    """Group entries by (remote host, user agent), each user's list in time order.

    Users are ordered by their first request, so any permutation of the input
    produces the same mapping.
    """
    users: Dict[UserKey, List[LogEntry]] = {}
    for entry in entries:
        users.setdefault(UserKey(entry.remote_host, entry.user_agent), []).append(entry)
    for requests in users.values():
        requests.sort(key=LogEntry.sort_key)
    ordered = sorted(users.items(), key=lambda item: (
        item[1][0].timestamp, item[0].remote_host, item[0].user_agent or ''))
    return dict(ordered)


def sessionize(user_entries: Sequence[LogEntry], timeout_s: float = DEFAULT_TIMEOUT_S,
               last_dwell_s: float = DEFAULT_LAST_DWELL_S, strip_query: bool = True) -> List[Session]:
    """Split one user's requests into sessions.

    A gap longer than ``timeout_s`` starts a new session. A page's dwell time
    is the time until the next request of the same session; the last page of
    every session gets ``last_dwell_s``.
    """
    if timeout_s <= 0:
        raise ValueError('timeout_s must be positive')
    if last_dwell_s <= 0:
        raise ValueError('last_dwell_s must be positive')
    if not user_entries:
        return []
    ordered = sorted(user_entries, key=LogEntry.sort_key)
    user = UserKey(ordered[0].remote_host, ordered[0].user_agent)

    groups = [[ordered[0]]]
    for previous, current in zip(ordered, ordered[1:]):
        if (current.timestamp - previous.timestamp).total_seconds() > timeout_s:
            groups.append([])
        groups[-1].append(current)

    sessions = []
    for group in groups:
        views = [
            PageView(normalize_uri(entry.uri, strip_query),
                     (following.timestamp - entry.timestamp).total_seconds())
            for entry, following in zip(group, group[1:])
        ]
        views.append(PageView(normalize_uri(group[-1].uri, strip_query), float(last_dwell_s)))
        sessions.append(Session(user_id=user, entries=tuple(views), started_at=group[0].timestamp))
    return sessions


@dataclass(frozen=True)
class UrlVocabulary:
    urls: Tuple[str, ...]
    index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        urls = tuple(self.urls)
        index = {url: position for position, url in enumerate(urls)}
        if len(index) != len(urls):
            raise ValueError('Vocabulary URLs must be unique')
        object.__setattr__(self, 'urls', urls)
        object.__setattr__(self, 'index', index)

    def __len__(self) -> int:
        return len(self.urls)


def build_vocabulary(entries: Iterable[LogEntry], strip_query: bool = True) -> UrlVocabulary:
    """Sorted unique normalized URIs of the cleaned entries."""
    return UrlVocabulary(tuple(sorted({normalize_uri(e.uri, strip_query) for e in entries})))


def vectorize_sessions(sessions: Sequence[Session], vocab: UrlVocabulary,
                       weighting: str = Weighting.DWELL) -> Dataset:
    """One row per session; column j holds the total dwell seconds on URL j
    (or 1/0 presence with binary weighting)."""
    weighting = Weighting(weighting)
    weights = np.zeros((len(sessions), len(vocab)))
    for row, session in enumerate(sessions):
        for view in session.entries:
            column = vocab.index.get(view.uri)
            if column is None:
                raise UnknownUrl(view.uri)
            if weighting is Weighting.BINARY:
                weights[row, column] = 1.0
            else:
                weights[row, column] += view.dwell_seconds
    return Dataset(weights, vocab.urls)


# Whole pipeline

@dataclass(frozen=True)
class PipelineCounts:
    raw_entries: int
    skipped_lines: int
    cleaned_entries: int
    urls: int
    users: int
    sessions: int


@dataclass(frozen=True)
class PreprocessResult:
    sessions: Tuple[Session, ...]
    vocabulary: UrlVocabulary
    dataset: Dataset
    counts: PipelineCounts


def preprocess_entries(entries: Sequence[LogEntry], rules: CleanRules = CleanRules(),
                       timeout_s: float = DEFAULT_TIMEOUT_S,
                       last_dwell_s: float = DEFAULT_LAST_DWELL_S, strip_query: bool = True,
                       weighting: str = Weighting.DWELL, skipped_lines: int = 0) -> PreprocessResult:
    cleaned = clean_entries(entries, rules)
    vocabulary = build_vocabulary(cleaned, strip_query)
    users = identify_users(cleaned)
    sessions = []
    for requests in users.values():
        sessions.extend(sessionize(requests, timeout_s, last_dwell_s, strip_query))
    dataset = vectorize_sessions(sessions, vocabulary, weighting)
    counts = PipelineCounts(
        raw_entries=len(entries),
        skipped_lines=skipped_lines,
        cleaned_entries=len(cleaned),
        urls=len(vocabulary),
        users=len(users),
        sessions=len(sessions),
    )
    logger.info(
        'preprocessed %d entries (%d skipped): %d after cleaning, %d URLs, %d users, %d sessions',
        counts.raw_entries, counts.skipped_lines, counts.cleaned_entries,
        counts.urls, counts.users, counts.sessions,
    )
    return PreprocessResult(tuple(sessions), vocabulary, dataset, counts)


def preprocess(paths: Sequence[Union[str, Path]], format: str = LogFormat.COMBINED,
               rules: CleanRules = CleanRules(), timeout_s: float = DEFAULT_TIMEOUT_S,
               last_dwell_s: float = DEFAULT_LAST_DWELL_S, strip_query: bool = True,
               weighting: str = Weighting.DWELL) -> PreprocessResult:
    entries = []
    skipped = 0
    for path in paths:
        parsed, bad = read_log_file(path, format)
        entries.extend(parsed)
        skipped += bad
    return preprocess_entries(entries, rules, timeout_s, last_dwell_s, strip_query,
                              weighting, skipped_lines=skipped)


def write_sessions_csv(sessions: Sequence[Session], path: Union[str, Path]) -> None:
    rows = [
        (session_id, str(session.user_id), view.uri, view.dwell_seconds)
        for session_id, session in enumerate(sessions)
        for view in session.entries
    ]
    frame = pd.DataFrame(rows, columns=['session_id', 'user_id', 'url', 'dwell_seconds'])
    frame.to_csv(path, index=False)


def write_dataset_csv(dataset: Dataset, path: Union[str, Path]) -> None:
    save_dataset(dataset, path)
