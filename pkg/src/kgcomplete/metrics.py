"""Error and convergence metrics over per-period estimate series."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .estimators import Estimate, Method

DEFAULT_WINDOW = 4
DEFAULT_LOW = 0.001
DEFAULT_HIGH = 0.1


class UndefinedMetric(ValueError):
    pass


def _is_defined(x) -> bool:
    return x is not None and not (isinstance(x, float) and math.isnan(x))


@dataclass
class SeriesRecord:
    period: int
    D: int
    n: int
    f1: int
    f2: int
    estimates: dict[str, float | None] = field(default_factory=dict)


@dataclass
class EstimateSeries:
    """Per-period cumulative estimates for one class."""

    class_id: str
    records: list[SeriesRecord] = field(default_factory=list)

    def append(self, period: int, histogram, estimates: Iterable[Estimate]):
        if self.records:
            last = self.records[-1]
            if period != last.period + 1:
                raise ValueError("periods must be contiguous")
            if histogram.D < last.D:
                raise ValueError("distinct count decreased")
        elif period != 0:
            raise ValueError("series must start at period 0")
        self.records.append(
            SeriesRecord(
                period=period,
                D=histogram.D,
                n=histogram.n,
                f1=histogram.f1,
                f2=histogram.f2,
                estimates={e.method.value: e.as_float() for e in estimates},
            )
        )

    def values(self, method: Method | str) -> list[float | None]:
        key = method.value if isinstance(method, Method) else method
        return [r.estimates.get(key) for r in self.records]

    def distincts(self) -> list[int]:
        return [r.D for r in self.records]

    def __len__(self):
        return len(self.records)


def phi_error(estimates: Sequence[float | None], ground_truth: float) -> float:
    """Recency-weighted mean absolute error against the true class size.

    Period ``i`` (1-based) carries weight ``i``. Undefined estimates drop
    out together with their weight.
    """
    if ground_truth <= 0:
        raise ValueError("ground truth must be positive")
    num = 0.0
    den = 0
    for i, est in enumerate(estimates, start=1):
        if _is_defined(est):
            num += abs(est - ground_truth) * i
            den += i
    if den == 0:
        raise UndefinedMetric("no defined estimates")
    return num / den


def rho_convergence(
    estimates: Sequence[float | None],
    distincts: Sequence[int],
    w: int = DEFAULT_WINDOW,
    paper_bounds: bool = False,
) -> float:
    """Mean relative gap between estimate and distinct count over the last ``w`` periods.

    With ``paper_bounds=True`` the last ``w + 1`` terms are summed and the
    total is still divided by ``w`` (kept only for comparison).
    """
    if len(estimates) != len(distincts):
        raise ValueError("estimates and distincts differ in length")
    if w < 1:
        raise ValueError("window must be >= 1")
    terms = w + 1 if paper_bounds else w
    if len(estimates) < terms:
        raise UndefinedMetric(f"series shorter than window ({len(estimates)} < {terms})")
    total = 0.0
    for est, d in zip(estimates[-terms:], distincts[-terms:]):
        if not _is_defined(est) or d <= 0:
            raise UndefinedMetric("undefined estimate or empty class inside window")
        total += abs(est - d) / d
    return total / w


def completeness_flag(rho: float | None, low: float = DEFAULT_LOW, high: float = DEFAULT_HIGH) -> str:
    if rho is None:
        return "indeterminate"
    if rho < low:
        return "complete"
    if rho > high:
        return "incomplete"
    return "indeterminate"


class RankEntry(NamedTuple):
    class_id: str
    rho: float
    D: int


class Ranking(NamedTuple):
    complete: list[RankEntry]
    incomplete: list[RankEntry]
    excluded: int


def rank_by_convergence(
    reports: Iterable[tuple[str, float | None, int]],
    threshold_low: float = DEFAULT_LOW,
    threshold_high: float = DEFAULT_HIGH,
) -> Ranking:
    """Split classes into complete and incomplete candidates by ``rho``.

    Both lists are sorted by ascending ``rho`` (ties by class id). Classes
    with undefined ``rho`` are excluded and counted.
    """
    complete, incomplete = [], []
    excluded = 0
    for class_id, rho, d in reports:
        if not _is_defined(rho):
            excluded += 1
            continue
        entry = RankEntry(class_id, float(rho), int(d))
        if rho < threshold_low:
            complete.append(entry)
        elif rho > threshold_high:
            incomplete.append(entry)
    key = lambda e: (e.rho, e.class_id)  # noqa: E731
    return Ranking(sorted(complete, key=key), sorted(incomplete, key=key), excluded)
