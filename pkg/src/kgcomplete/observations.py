"""Mentions, per-period observations and frequency-of-frequencies histograms.

A *mention* is one timestamped reference to an instance of a class. Mentions
are bucketed into fixed-length sample periods; within a period an instance
counts as at most one *observation*. The histogram over the first ``k``
periods records how many instances were observed exactly ``i`` times.
"""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, MutableMapping

import numpy as np

from . import _core

log = logging.getLogger(__name__)

SECONDS_PER_DAY = 86_400
DEFAULT_PERIOD_DAYS = 30
DEFAULT_PERIOD_LENGTH = DEFAULT_PERIOD_DAYS * SECONDS_PER_DAY


@dataclass(frozen=True, slots=True)
class Mention:
    entity_id: str
    class_id: str
    timestamp: int

    def __post_init__(self):
        if not self.entity_id or not self.class_id:
            raise ValueError("entity_id and class_id must be non-empty")
        if self.timestamp < 0:
            raise ValueError(f"negative timestamp {self.timestamp}")


@dataclass(frozen=True)
class FrequencyHistogram:
    """Frequency of frequencies over ``k`` sample periods.

    ``f`` maps a capture frequency ``i`` to the number of instances seen in
    exactly ``i`` periods. Zero counts are never stored, and neither is
    ``f_0``, the unseen count everything downstream tries to estimate.
    """

    k: int
    n: int
    D: int
    f: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        f = {int(i): int(c) for i, c in sorted(self.f.items()) if c}
        object.__setattr__(self, "f", f)
        if any(c < 0 for c in f.values()):
            raise ValueError("negative frequency count")
        if sum(f.values()) != self.D:
            raise ValueError(f"sum of f_i ({sum(f.values())}) != D ({self.D})")
        if sum(i * c for i, c in f.items()) != self.n:
            raise ValueError("sum of i*f_i != n")
        if f and (min(f) < 1 or max(f) > self.k):
            raise ValueError(f"frequencies must lie in [1, {self.k}]")
        # k == 0 is reserved for the histogram of an empty stream
        if self.k < 0 or (self.k == 0 and self.D):
            raise ValueError("k must be >= 1")

    @property
    def f1(self) -> int:
        return self.f.get(1, 0)

    @property
    def f2(self) -> int:
        return self.f.get(2, 0)

    @classmethod
    def from_counts(cls, counts: Iterable[int], k: int) -> "FrequencyHistogram":
        """Build from per-instance capture counts ``X_j`` (zeros ignored)."""
        f = Counter(int(x) for x in counts if x)
        return cls(k=k, n=sum(i * c for i, c in f.items()), D=sum(f.values()), f=f)

    @classmethod
    def from_row(cls, row, k: int) -> "FrequencyHistogram":
        """Build from one row of a ``frequency_table`` (column ``i`` is ``f_i``)."""
        row = np.asarray(row)
        idx = np.flatnonzero(row)
        f = {int(i): int(row[i]) for i in idx}
        return cls(k=k, n=int((idx * row[idx]).sum()), D=int(row[idx].sum()), f=f)


@dataclass
class PeriodizedObservations:
    """Deduplicated observations of one class, one set per sample period."""

    class_id: str
    origin: int
    period_length: int
    periods: list[frozenset[str]] = field(default_factory=list)

    def __post_init__(self):
        if self.period_length <= 0:
            raise ValueError("period_length must be positive")
        self.periods = [frozenset(p) for p in self.periods]

    @property
    def k(self) -> int:
        return len(self.periods)

    def period_of(self, timestamp: int) -> int:
        return (timestamp - self.origin) // self.period_length

    def merge(self, other: "PeriodizedObservations") -> "PeriodizedObservations":
        """Union of two partial structures of the same class and grid."""
        if (self.class_id, self.origin, self.period_length) != (
            other.class_id,
            other.origin,
            other.period_length,
        ):
            raise ValueError("cannot merge observations on different classes or grids")
        k = max(self.k, other.k)
        pad = frozenset()
        periods = [
            (self.periods[i] if i < self.k else pad) | (other.periods[i] if i < other.k else pad)
            for i in range(k)
        ]
        return PeriodizedObservations(self.class_id, self.origin, self.period_length, periods)


def default_origin(timestamps: Iterable[int]) -> int:
    """Earliest timestamp truncated to midnight UTC."""
    first = min(timestamps)
    return first - first % SECONDS_PER_DAY


def bucket_mentions(
    mentions: Iterable[Mention],
    origin: int | None = None,
    period_length: int = DEFAULT_PERIOD_LENGTH,
    counters: MutableMapping[str, int] | None = None,
) -> dict[str, PeriodizedObservations]:
    """Group mentions by class into deduplicated per-period entity sets.

    Mentions before ``origin`` are skipped; the number skipped is logged and
    added to ``counters["pre_origin"]`` when a counter mapping is supplied.
    With ``origin=None`` the origin defaults to :func:`default_origin` of
    the stream.
    """
    if period_length <= 0:
        raise ValueError("period_length must be positive")
    if origin is None:
        mentions = list(mentions)
        if not mentions:
            return {}
        origin = default_origin(m.timestamp for m in mentions)

    buckets: dict[str, dict[int, set[str]]] = {}
    skipped = 0
    for m in mentions:
        if m.timestamp < origin:
            skipped += 1
            continue
        p = (m.timestamp - origin) // period_length
        buckets.setdefault(m.class_id, {}).setdefault(p, set()).add(m.entity_id)

    if skipped:
        log.warning("skipped %d mention(s) before origin %d", skipped, origin)
    if counters is not None:
        counters["pre_origin"] = counters.get("pre_origin", 0) + skipped

    out = {}
    for class_id, by_period in buckets.items():
        k = max(by_period) + 1
        periods = [frozenset(by_period.get(i, ())) for i in range(k)]
        out[class_id] = PeriodizedObservations(class_id, origin, period_length, periods)
    return out


def histogram_at(obs: PeriodizedObservations, upto_period: int) -> FrequencyHistogram:
    """Histogram over periods ``0..upto_period`` inclusive."""
    if not 0 <= upto_period < obs.k:
        raise IndexError(f"upto_period {upto_period} outside [0, {obs.k})")
    counts = Counter()
    for period in obs.periods[: upto_period + 1]:
        counts.update(period)
    return FrequencyHistogram.from_counts(counts.values(), k=upto_period + 1)


def series_histograms(obs: PeriodizedObservations) -> list[FrequencyHistogram]:
    """Cumulative histograms, element ``i`` covering periods ``0..i``."""
    if not obs.periods:
        return []
    codes: dict[str, int] = {}
    pairs = []
    for p, period in enumerate(obs.periods):
        for e in period:
            pairs.append((codes.setdefault(e, len(codes)), p))
    pairs.sort()
    arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    table = _core.frequency_table(arr[:, 0], arr[:, 1], obs.k)
    return [FrequencyHistogram.from_row(row, k=i + 1) for i, row in enumerate(table)]
