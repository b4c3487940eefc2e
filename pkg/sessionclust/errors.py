"""
Exception hierarchy shared by the log pipeline, the clustering algorithms,
the validity indices and the evaluation harness.

Everything derives from ValueError so callers that only guard against bad
input keep working.
"""


class SessionClustError(ValueError):
    pass


# Log pipeline

class LogParseError(SessionClustError):
    """A log line could not be turned into a LogEntry."""

    def __init__(self, message: str, field: str, line: str = ''):
        super().__init__(f'{message} (field: {field})')
        self.field = field
        self.line = line


class MalformedLine(LogParseError):
    pass


class BadTimestamp(LogParseError):
    pass


class BadStatus(LogParseError):
    pass


class UnknownUrl(SessionClustError):
    def __init__(self, url: str):
        super().__init__(f'URL not in vocabulary: {url}')
        self.url = url


# Clustering

class ClusteringError(SessionClustError):
    pass


class DimensionMismatch(ClusteringError):
    pass


class EmptyDataset(ClusteringError):
    pass


class KTooLarge(ClusteringError):
    pass


class AllNoise(ClusteringError):
    pass


# Validity indices

class IndexUndefined(SessionClustError):
    """An index has no value for the given clustering."""


class TooFewClusters(IndexUndefined):
    pass


class DegenerateDiameter(IndexUndefined):
    pass


class ZeroSeparation(IndexUndefined):
    pass


class NoIntraPairs(IndexUndefined):
    pass


class DegenerateSpread(IndexUndefined):
    pass


class LengthMismatch(IndexUndefined):
    pass


class NoPairs(IndexUndefined):
    pass


class Undefined(IndexUndefined):
    pass


# Harness

class HarnessError(SessionClustError):
    pass


class EmptyRows(HarnessError):
    pass


class InvalidSweepConfig(HarnessError):
    pass


class OracleMismatch(HarnessError):
    """An implementation disagreed with its brute-force oracle.

    ``instance`` is a JSON document that is enough to replay the failing case.
    """

    def __init__(self, check: str, deviation: float, instance: str):
        super().__init__(f'Oracle check {check} failed (deviation {deviation:.3g})')
        self.check = check
        self.deviation = deviation
        self.instance = instance
