"""Non-parametric class size estimators.

Every estimator maps a :class:`~kgcomplete.observations.FrequencyHistogram`
to an :class:`Estimate`. Histograms for which a formula has no finite value
(typically zero sample coverage, i.e. every observed instance is a
singleton) yield ``defined=False`` instead of raising, since early periods
of real classes routinely look like that.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable

from .observations import FrequencyHistogram


class Method(str, enum.Enum):
    JACK1 = "JACK1"
    JACK2 = "JACK2"
    N1_UNIF = "N1_UNIF"
    SOR = "SOR"
    CHAO92 = "CHAO92"

    @classmethod
    def parse(cls, name: str) -> "Method":
        key = name.strip().upper().replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown estimator {name!r}") from None


# JACK2 over-estimates on large samples; request it explicitly.
DEFAULT_METHODS = (Method.JACK1, Method.N1_UNIF, Method.SOR, Method.CHAO92)


class UndefinedError(ValueError):
    """A quantity has no finite value for the given histogram."""


@dataclass(frozen=True)
class Estimate:
    method: Method
    value: float
    defined: bool = True

    @classmethod
    def undefined(cls, method: Method) -> "Estimate":
        return cls(method, math.nan, False)

    def as_float(self) -> float | None:
        return self.value if self.defined else None


def jack1(h: FrequencyHistogram) -> Estimate:
    if h.k < 1:
        return Estimate.undefined(Method.JACK1)
    return Estimate(Method.JACK1, h.D + (h.k - 1) / h.k * h.f1)


def jack2(h: FrequencyHistogram) -> Estimate:
    k = h.k
    if k < 2:
        return Estimate.undefined(Method.JACK2)
    value = h.D + (2 * k - 3) / k * h.f1 - (k - 2) ** 2 / (k * (k - 1)) * h.f2
    return Estimate(Method.JACK2, value)


def sample_coverage(h: FrequencyHistogram) -> float:
    """Good-Turing sample coverage ``1 - f1/n``."""
    if h.n < 1:
        raise UndefinedError("sample coverage needs at least one observation")
    return 1.0 - h.f1 / h.n


def n1_unif(h: FrequencyHistogram) -> Estimate:
    try:
        coverage = sample_coverage(h)
    except UndefinedError:
        return Estimate.undefined(Method.N1_UNIF)
    if coverage <= 0.0:
        return Estimate.undefined(Method.N1_UNIF)
    return Estimate(Method.N1_UNIF, h.D / coverage)


def clamped_singletons(h: FrequencyHistogram) -> float:
    """Singleton count limited to two standard deviations above the mean.

    Mean and standard deviation are taken over ``f_j`` for the observed
    frequency classes ``j > 1``. With fewer than three observed frequency
    classes the dispersion cannot be estimated and ``f1`` is returned as is.
    """
    n_classes = len(h.f)
    if n_classes < 3:
        return float(h.f1)
    others = [c for i, c in h.f.items() if i > 1]
    mu = sum(others) / (n_classes - 1)
    sigma = math.sqrt(sum((c - mu) ** 2 for c in others) / (n_classes - 2))
    return min(float(h.f1), 2.0 * sigma + mu)


def sor(h: FrequencyHistogram) -> Estimate:
    if h.n < 1:
        return Estimate.undefined(Method.SOR)
    f1 = clamped_singletons(h)
    if f1 >= h.n:
        return Estimate.undefined(Method.SOR)
    return Estimate(Method.SOR, h.D / (1.0 - f1 / h.n))


def gamma_squared(h: FrequencyHistogram, literal_denominator: bool = False) -> float:
    """Estimated squared coefficient of variation of capture probabilities.

    ``literal_denominator=True`` evaluates ``N_unif * S2 / (n(n-1) - 1)``
    with no subtraction, an alternative typesetting of the same formula kept
    for comparison only; it is not zero for equiprobable samples.
    """
    if h.n < 2:
        raise UndefinedError("coefficient of variation needs n >= 2")
    coverage = sample_coverage(h)
    if coverage <= 0.0:
        raise UndefinedError("zero sample coverage")
    n_unif = h.D / coverage
    s2 = sum(i * (i - 1) * c for i, c in h.f.items())
    pairs = h.n * (h.n - 1)
    if literal_denominator:
        return max(n_unif * s2 / (pairs - 1), 0.0)
    return max(n_unif * s2 / pairs - 1.0, 0.0)


def chao92(h: FrequencyHistogram, literal_denominator: bool = False) -> Estimate:
    try:
        g2 = gamma_squared(h, literal_denominator)
    except UndefinedError:
        return Estimate.undefined(Method.CHAO92)
    return Estimate(Method.CHAO92, (h.D + h.f1 * g2) / sample_coverage(h))


_DISPATCH = {
    Method.JACK1: jack1,
    Method.JACK2: jack2,
    Method.N1_UNIF: n1_unif,
    Method.SOR: sor,
}


def estimate(h: FrequencyHistogram, method: Method, literal_denominator: bool = False) -> Estimate:
    method = Method(method)
    if method is Method.CHAO92:
        return chao92(h, literal_denominator)
    return _DISPATCH[method](h)


def estimate_all(
    h: FrequencyHistogram,
    methods: Iterable[Method] = DEFAULT_METHODS,
    literal_denominator: bool = False,
) -> list[Estimate]:
    """One estimate per requested method, in :class:`Method` declaration order."""
    wanted = {Method(m) for m in methods}
    return [estimate(h, m, literal_denominator) for m in Method if m in wanted]
