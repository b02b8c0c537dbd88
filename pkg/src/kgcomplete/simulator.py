"""Synthetic closed populations and mention streams with known ground truth.

Draws follow a stationary multinomial: every period makes
``draws_per_period`` independent draws with replacement from ``p``.
Randomness comes from numpy's PCG64 bit generator seeded with the scenario
seed; draws use inverse-CDF lookup of ``Generator.random()`` doubles on the
cumulative probability vector, so streams are reproducible from the seed
alone.
"""
from __future__ import annotations

import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .observations import DEFAULT_PERIOD_LENGTH, SECONDS_PER_DAY, FrequencyHistogram, Mention

log = logging.getLogger(__name__)

GENERATOR = "numpy.random.PCG64/inverse-cdf"


@dataclass(frozen=True)
class Population:
    N: int
    p: np.ndarray = field(repr=False)
    distribution: str = "uniform"
    s: float | None = None

    def __post_init__(self):
        if len(self.p) != self.N:
            raise ValueError("probability vector length must equal N")
        if not np.all(self.p > 0) or abs(float(self.p.sum()) - 1.0) > 1e-9:
            raise ValueError("probabilities must be positive and sum to 1")

    def describe(self) -> dict:
        out = {"N": self.N, "distribution": self.distribution}
        if self.s is not None:
            out["s"] = self.s
        return out


def make_population(N: int, distribution: str = "uniform", s: float | None = None) -> Population:
    if N < 1:
        raise ValueError("N must be >= 1")
    dist = distribution.lower()
    if dist == "uniform":
        return Population(N, np.full(N, 1.0 / N), "uniform")
    if dist == "zipf":
        if s is None or s <= 0:
            raise ValueError("zipf exponent s must be > 0")
        w = 1.0 / np.arange(1, N + 1, dtype=np.float64) ** s
        return Population(N, w / w.sum(), "zipf", float(s))
    raise ValueError(f"unknown distribution {distribution!r}")


@dataclass(frozen=True)
class Burst:
    period: int
    count: int


@dataclass(frozen=True)
class ScenarioSpec:
    population: Population
    k: int
    draws_per_period: int
    bursts: tuple[Burst, ...] = ()
    seed: int = 0
    class_id: str = "SIM"
    origin: int = 0
    period_length: int = DEFAULT_PERIOD_LENGTH
    entity_prefix: str = "Q"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.draws_per_period < 1:
            raise ValueError("draws_per_period must be >= 1")
        if self.period_length < 1 or self.origin < 0:
            raise ValueError("invalid period grid")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        for b in self.bursts:
            if not 0 <= b.period < self.k:
                raise ValueError(f"burst period {b.period} outside [0, {self.k})")
            if not 0 <= b.count <= self.population.N:
                raise ValueError(f"burst count {b.count} outside [0, N]")

    def to_dict(self) -> dict:
        return {
            **self.population.describe(),
            "k": self.k,
            "draws_per_period": self.draws_per_period,
            "bursts": [{"period": b.period, "count": b.count} for b in self.bursts],
            "seed": self.seed,
            "class_id": self.class_id,
            "origin": self.origin,
            "period_days": self.period_length / SECONDS_PER_DAY,
            "entity_prefix": self.entity_prefix,
        }


_SCENARIO_KEYS = {
    "N", "distribution", "s", "k", "draws_per_period", "bursts", "seed",
    "class_id", "origin", "period_days", "entity_prefix",
}


def scenario_from_dict(data: dict) -> ScenarioSpec:
    """Validate a scenario mapping; see the README for the schema."""
    unknown = set(data) - _SCENARIO_KEYS
    if unknown:
        raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
    missing = {"N", "k", "draws_per_period"} - set(data)
    if missing:
        raise ValueError(f"missing scenario keys: {sorted(missing)}")
    pop = make_population(int(data["N"]), data.get("distribution", "uniform"), data.get("s"))
    bursts = []
    for b in data.get("bursts", []):
        if isinstance(b, dict):
            bursts.append(Burst(int(b["period"]), int(b["count"])))
        else:
            period, count = b
            bursts.append(Burst(int(period), int(count)))
    period_length = round(float(data.get("period_days", 30)) * SECONDS_PER_DAY)
    return ScenarioSpec(
        population=pop,
        k=int(data["k"]),
        draws_per_period=int(data["draws_per_period"]),
        bursts=tuple(bursts),
        seed=int(data.get("seed", 0)),
        class_id=str(data.get("class_id", "SIM")),
        origin=int(data.get("origin", 0)),
        period_length=period_length,
        entity_prefix=str(data.get("entity_prefix", "Q")),
    )


def load_scenario(path) -> ScenarioSpec:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("scenario must be a JSON object")
    return scenario_from_dict(data)


def simulate_indices(spec: ScenarioSpec) -> list[np.ndarray]:
    """Instance indices (0-based) mentioned in each period, in draw order.

    Burst instances are appended after the period's regular draws.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    cdf = np.cumsum(spec.population.p)
    cdf[-1] = 1.0
    bursts = defaultdict(int)
    for b in spec.bursts:
        bursts[b.period] += b.count
    seen = np.zeros(spec.population.N, dtype=bool)
    out = []
    for period in range(spec.k):
        draws = np.searchsorted(cdf, rng.random(spec.draws_per_period), side="right")
        np.minimum(draws, spec.population.N - 1, out=draws)
        seen[draws] = True
        wanted = bursts.get(period, 0)
        if wanted:
            unseen = np.flatnonzero(~seen)
            if wanted > len(unseen):
                log.warning(
                    "burst at period %d wants %d fresh instances, only %d remain",
                    period, wanted, len(unseen),
                )
                wanted = len(unseen)
            fresh = np.sort(rng.choice(unseen, size=wanted, replace=False))
            seen[fresh] = True
            draws = np.concatenate([draws, fresh])
        out.append(draws)
    return out


def simulate(spec: ScenarioSpec) -> Iterator[Mention]:
    """Mention stream for one synthetic class, timestamped at period midpoints."""
    for period, draws in enumerate(simulate_indices(spec)):
        ts = spec.origin + period * spec.period_length + spec.period_length // 2
        for i in draws.tolist():
            yield Mention(f"{spec.entity_prefix}{i + 1}", spec.class_id, ts)


def naive_frequency_count(
    mentions: Sequence[Mention],
    origin: int,
    period_length: int,
    class_id: str | None = None,
) -> FrequencyHistogram:
    """Brute-force histogram: materialize per-period sets, then count.

    Reference oracle for the observation pipeline. Only mentions of
    ``class_id`` count when it is given; pre-origin mentions are ignored.
    """
    periods: dict[int, set[str]] = {}
    for m in mentions:
        if class_id is not None and m.class_id != class_id:
            continue
        if m.timestamp < origin:
            continue
        periods.setdefault((m.timestamp - origin) // period_length, set()).add(m.entity_id)
    if not periods:
        return FrequencyHistogram(k=0, n=0, D=0, f={})
    k = max(periods) + 1
    counts: dict[str, int] = {}
    for p in range(k):
        for e in periods.get(p, ()):
            counts[e] = counts.get(e, 0) + 1
    f: dict[int, int] = {}
    for x in counts.values():
        f[x] = f.get(x, 0) + 1
    n = 0
    for x in counts.values():
        n += x
    return FrequencyHistogram(k=k, n=n, D=len(counts), f=f)


def write_synthetic_dump(
    directory,
    n_edits: int,
    n_entities: int = 500_000,
    n_classes: int = 1_000,
    n_superclasses: int = 100,
    years: float = 6.0,
    seed: int = 0,
) -> dict[str, str]:
    """Write a synthetic ontology TSV and edit-history TSV for load testing.

    Every entity is an instance of one leaf class and every leaf class is a
    subclass of one superclass, so each edit between two entities resolves
    to four mentions.
    """
    import os

    import pyarrow as pa
    from pyarrow import csv as pacsv

    rng = np.random.Generator(np.random.PCG64(seed))
    os.makedirs(directory, exist_ok=True)
    entities = np.array([f"Q{i}" for i in range(1, n_entities + 1)], dtype=object)
    leaf = rng.integers(0, n_classes, n_entities)
    parent = rng.integers(0, n_superclasses, n_classes)
    leaf_tokens = np.array([f"Q{10_000_000 + i}" for i in range(n_classes)], dtype=object)
    super_tokens = np.array([f"Q{20_000_000 + i}" for i in range(n_superclasses)], dtype=object)
    onto = pa.table(
        {
            "entity": np.concatenate([entities, leaf_tokens]),
            "relation": np.array(["instanceOf"] * n_entities + ["subclassOf"] * n_classes, dtype=object),
            "target": np.concatenate([leaf_tokens[leaf], super_tokens[parent]]),
        }
    )
    opts = pacsv.WriteOptions(include_header=False, delimiter="\t", quoting_style="none")
    paths = {"ontology": os.path.join(directory, "ontology.tsv"), "edits": os.path.join(directory, "edits.tsv")}
    pacsv.write_csv(onto, paths["ontology"], write_options=opts)

    weights = 1.0 / np.arange(1, n_entities + 1) ** 0.8
    cdf = np.cumsum(weights / weights.sum())
    cdf[-1] = 1.0
    perm = rng.permutation(n_entities)
    span = int(years * 365 * SECONDS_PER_DAY)
    start = 1_350_000_000
    chunk = 1_000_000
    with open(paths["edits"], "wb") as fh:
        for lo in range(0, n_edits, chunk):
            m = min(chunk, n_edits - lo)
            subj = perm[np.searchsorted(cdf, rng.random(m), side="right")]
            obj = perm[np.searchsorted(cdf, rng.random(m), side="right")]
            ts = np.sort(rng.integers(start, start + span, m))
            table = pa.table(
                {
                    "subject": entities[subj],
                    "property": np.full(m, "P1", dtype=object),
                    "object": entities[obj],
                    "timestamp": ts,
                    "user": np.full(m, "bot", dtype=object),
                }
            )
            pacsv.write_csv(table, fh, write_options=opts)
    return paths
