"""Bulk resolve and estimate paths used by the command line.

These operate on integer-coded numpy arrays rather than per-record Python
objects, but compute exactly what the object-level operations in
``observations``, ``ontology`` and ``estimators`` compute.
"""
from __future__ import annotations

import logging
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np
import pyarrow as pa
import pyarrow.compute as pc

from . import _core
from . import io as kio
from .estimators import DEFAULT_METHODS, Method, estimate_all
from .metrics import (
    DEFAULT_HIGH,
    DEFAULT_LOW,
    DEFAULT_WINDOW,
    EstimateSeries,
    UndefinedMetric,
    completeness_flag,
    phi_error,
    rho_convergence,
)
from .observations import DEFAULT_PERIOD_LENGTH, SECONDS_PER_DAY, FrequencyHistogram, Mention
from .ontology import (
    DEFAULT_ENTITY_PATTERN,
    CompositeClassSpec,
    MembershipResolver,
    build_index,
    build_property_graph,
)

log = logging.getLogger(__name__)

WORKERS_ENV = "KGCOMPLETE_WORKERS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


# --------------------------------------------------------------------------
# resolve


def _encode(arr) -> tuple[np.ndarray, pa.Array]:
    enc = pc.dictionary_encode(kio._flat(arr))
    return enc.indices.to_numpy(zero_copy_only=False).astype(np.int64), enc.dictionary


def resolve_file(
    edit_path,
    ontology_path,
    property_path=None,
    class_filter: Sequence[str | CompositeClassSpec] | None = None,
    out_path=None,
    entity_pattern: str = DEFAULT_ENTITY_PATTERN,
) -> dict[str, int]:
    """Join an edit history against a snapshot ontology and write mentions.

    Output rows follow edit order; within an edit the subject's classes come
    before the object's, each in sorted order. Returns the counters.
    """
    counters: dict[str, int] = {}
    onto, bad_onto = kio.read_delimited(ontology_path, kio.ONTOLOGY_COLUMNS, "\t")
    index = build_index(kio.iter_rows(onto, kio.ONTOLOGY_COLUMNS), counters)
    counters["ontology_malformed"] = bad_onto
    graph = {}
    if property_path is not None:
        props, bad_props = kio.read_delimited(property_path, kio.PROPERTY_COLUMNS, "\t")
        graph = build_property_graph(kio.iter_rows(props, kio.PROPERTY_COLUMNS))
        counters["property_malformed"] = bad_props
    resolver = MembershipResolver(index, class_filter, graph)

    edits, bad = kio.read_delimited(edit_path, kio.EDIT_COLUMNS, "\t")
    ts = kio.parse_timestamps(edits.column("timestamp"))
    subj = kio._flat(edits.column("subject"))
    prop = kio._flat(edits.column("property"))
    valid = (
        (ts >= 0)
        & (pc.utf8_length(subj).to_numpy(zero_copy_only=False) > 0)
        & (pc.utf8_length(prop).to_numpy(zero_copy_only=False) > 0)
    )
    malformed = bad + int((~valid).sum())
    keep = pa.array(valid)
    subj = pc.filter(subj, keep)
    obj = pc.filter(kio._flat(edits.column("object")), keep)
    ts = ts[valid]
    n_edits = len(ts)

    class_codes: dict[str, int] = {}

    def csr(labels: pa.Array, entity_only: bool):
        is_entity = re.compile(entity_pattern).fullmatch
        counts = np.zeros(len(labels), dtype=np.int64)
        flat: list[int] = []
        for i, label in enumerate(labels.to_pylist()):
            if not label or (entity_only and not is_entity(label)):
                continue
            classes = resolver(label)
            counts[i] = len(classes)
            flat.extend(class_codes.setdefault(c, len(class_codes)) for c in classes)
        starts = np.zeros(len(labels), dtype=np.int64)
        if len(labels):
            starts[1:] = np.cumsum(counts)[:-1]
        return counts, starts, np.asarray(flat, dtype=np.int64)

    s_idx, s_dict = _encode(subj)
    o_idx, o_dict = _encode(obj)
    s_cnt, s_start, s_flat = csr(s_dict, entity_only=False)
    o_cnt, o_start, o_flat = csr(o_dict, entity_only=True)

    per_s = s_cnt[s_idx] if n_edits else np.zeros(0, np.int64)
    per_o = o_cnt[o_idx] if n_edits else np.zeros(0, np.int64)
    per_edit = per_s + per_o
    total = int(per_edit.sum())
    edit_of = np.repeat(np.arange(n_edits, dtype=np.int64), per_edit)
    first = np.cumsum(per_edit) - per_edit
    r = np.arange(total, dtype=np.int64) - first[edit_of]
    on_subject = r < per_s[edit_of]

    cls = np.empty(total, dtype=np.int64)
    ent = np.empty(total, dtype=np.int64)
    e_s = edit_of[on_subject]
    e_o = edit_of[~on_subject]
    cls[on_subject] = s_flat[s_start[s_idx[e_s]] + r[on_subject]]
    cls[~on_subject] = o_flat[o_start[o_idx[e_o]] + r[~on_subject] - per_s[e_o]]

    # entity labels: subject dictionary first, then object dictionary
    ent[on_subject] = s_idx[e_s]
    ent[~on_subject] = o_idx[e_o] + len(s_dict)
    labels = pa.concat_arrays([s_dict.cast(pa.string()), o_dict.cast(pa.string())])
    class_labels = pa.array(sorted(class_codes, key=class_codes.get), pa.string())

    if out_path is not None:
        kio.write_mention_table(
            out_path,
            pc.take(labels, pa.array(ent)),
            pc.take(class_labels, pa.array(cls)),
            ts[edit_of],
        )

    contributing = int((per_edit > 0).sum())
    counters.update(
        edits_read=n_edits + malformed,
        edits_malformed=malformed,
        edits_contributing=contributing,
        edits_unmatched=n_edits - contributing,
        edits_skipped=malformed + n_edits - contributing,
        mentions_emitted=total,
    )
    return counters


# --------------------------------------------------------------------------
# estimate


@dataclass
class MentionTable:
    entity: np.ndarray
    klass: np.ndarray
    timestamp: np.ndarray
    class_labels: list[str]
    malformed: int = 0

    @classmethod
    def from_mentions(cls, mentions: Iterable[Mention]) -> "MentionTable":
        ent_codes: dict[str, int] = {}
        cls_codes: dict[str, int] = {}
        e, c, t = [], [], []
        for m in mentions:
            e.append(ent_codes.setdefault(m.entity_id, len(ent_codes)))
            c.append(cls_codes.setdefault(m.class_id, len(cls_codes)))
            t.append(m.timestamp)
        return cls(
            np.asarray(e, dtype=np.int64),
            np.asarray(c, dtype=np.int64),
            np.asarray(t, dtype=np.int64),
            sorted(cls_codes, key=cls_codes.get),
        )

    @classmethod
    def load(cls, path) -> "MentionTable":
        table, bad = kio.read_delimited(path, kio.MENTION_COLUMNS, ",")
        ts = kio.parse_timestamps(table.column("timestamp"))
        ent = kio._flat(table.column("entity"))
        klass = kio._flat(table.column("class"))
        valid = (
            (ts >= 0)
            & (pc.utf8_length(ent).to_numpy(zero_copy_only=False) > 0)
            & (pc.utf8_length(klass).to_numpy(zero_copy_only=False) > 0)
        )
        if not valid.all():
            keep = pa.array(valid)
            ent, klass, ts = pc.filter(ent, keep), pc.filter(klass, keep), ts[valid]
        e_idx, _ = _encode(ent)
        c_idx, c_dict = _encode(klass)
        return cls(e_idx, c_idx, ts, c_dict.to_pylist(), bad + int((~valid).sum()))


@dataclass
class ClassObservations:
    """Deduplicated observations of one class, sorted by (entity, period)."""

    class_id: str
    entity: np.ndarray
    period: np.ndarray
    k: int

    @property
    def n(self) -> int:
        return len(self.entity)


def group_observations(
    table: MentionTable,
    origin: int | None = None,
    period_length: int = DEFAULT_PERIOD_LENGTH,
) -> tuple[list[ClassObservations], int, int]:
    """Bucket and deduplicate a mention table per class.

    Returns the per-class observations sorted by class id, the origin used
    and the number of pre-origin mentions skipped.
    """
    if period_length <= 0:
        raise ValueError("period_length must be positive")
    ts = table.timestamp
    if origin is None:
        if len(ts) == 0:
            return [], 0, 0
        first = int(ts.min())
        origin = first - first % SECONDS_PER_DAY
    ok = ts >= origin
    pre_origin = int((~ok).sum())
    ent, cls, ts = table.entity[ok], table.klass[ok], ts[ok]
    if len(ts) == 0:
        return [], origin, pre_origin
    period = (ts - origin) // period_length

    n_e = int(ent.max()) + 1
    n_p = int(period.max()) + 1
    n_c = int(cls.max()) + 1
    if n_c * n_e * n_p < 2**62:
        key = np.unique((cls * n_e + ent) * n_p + period)
        period = key % n_p
        rest = key // n_p
        ent = rest % n_e
        cls = rest // n_e
    else:
        order = np.lexsort((period, ent, cls))
        cls, ent, period = cls[order], ent[order], period[order]
        keep = np.ones(len(cls), dtype=bool)
        keep[1:] = (np.diff(cls) != 0) | (np.diff(ent) != 0) | (np.diff(period) != 0)
        cls, ent, period = cls[keep], ent[keep], period[keep]

    bounds = np.flatnonzero(np.diff(cls)) + 1
    starts = np.concatenate([[0], bounds])
    ends = np.concatenate([bounds, [len(cls)]])
    out = []
    for s, e in zip(starts.tolist(), ends.tolist()):
        p = period[s:e]
        out.append(
            ClassObservations(
                table.class_labels[int(cls[s])],
                np.ascontiguousarray(ent[s:e]),
                np.ascontiguousarray(p),
                int(p.max()) + 1,
            )
        )
    out.sort(key=lambda o: o.class_id)
    return out, origin, pre_origin


@dataclass
class EstimateConfig:
    period_length: int = DEFAULT_PERIOD_LENGTH
    origin: int | None = None
    w: int = DEFAULT_WINDOW
    methods: tuple[Method, ...] = DEFAULT_METHODS
    threshold_low: float = DEFAULT_LOW
    threshold_high: float = DEFAULT_HIGH
    min_observations: int = 0
    literal_gamma: bool = False
    paper_rho_bounds: bool = False

    def __post_init__(self):
        self.methods = tuple(m for m in Method if m in {Method(x) for x in self.methods})
        if not self.methods:
            raise ValueError("at least one method is required")
        if self.w < 1 or self.period_length < 1:
            raise ValueError("window and period length must be positive")

    def echo(self, origin: int) -> dict:
        d = asdict(self)
        d["origin"] = origin
        d["period_days"] = self.period_length / SECONDS_PER_DAY
        d["methods"] = [m.value for m in self.methods]
        return d


def estimate_series(obs: ClassObservations, config: EstimateConfig) -> tuple[EstimateSeries, list[FrequencyHistogram]]:
    table = _core.frequency_table(obs.entity, obs.period, obs.k)
    series = EstimateSeries(obs.class_id)
    hists = []
    for t, row in enumerate(table):
        h = FrequencyHistogram.from_row(row, k=t + 1)
        hists.append(h)
        series.append(t, h, estimate_all(h, config.methods, config.literal_gamma))
    return series, hists


def class_report(
    obs: ClassObservations,
    config: EstimateConfig,
    origin: int,
    ground_truth: float | None = None,
    skipped: dict | None = None,
) -> dict:
    series, hists = estimate_series(obs, config)
    rho = {}
    for m in config.methods:
        try:
            rho[m.value] = rho_convergence(
                series.values(m), series.distincts(), config.w, config.paper_rho_bounds
            )
        except UndefinedMetric:
            rho[m.value] = None
    try:
        spec = CompositeClassSpec.parse(obs.class_id)
    except ValueError:
        spec = None
    last = hists[-1]
    report = {
        "class": obs.class_id,
        "base_class": spec.base_class if spec else obs.class_id,
        "filters": [list(f) for f in spec.filters] if spec else [],
        "config": config.echo(origin),
        "k": last.k,
        "D": last.D,
        "n": last.n,
        "final": {m: v for m, v in series.records[-1].estimates.items()},
        "rho": rho,
        "flags": {
            m: completeness_flag(r, config.threshold_low, config.threshold_high)
            for m, r in rho.items()
        },
        "experimental": [Method.JACK2.value] if Method.JACK2 in config.methods else [],
        "series": [
            {
                "period": r.period,
                "D": r.D,
                "n": r.n,
                "f1": r.f1,
                "f2": r.f2,
                "estimates": r.estimates,
            }
            for r in series.records
        ],
        "skipped": dict(skipped or {}),
    }
    if ground_truth is not None:
        phi = {}
        for m in config.methods:
            try:
                phi[m.value] = phi_error(series.values(m), ground_truth)
            except UndefinedMetric:
                phi[m.value] = None
        phi["DISTINCT"] = phi_error(series.distincts(), ground_truth)
        report["ground_truth"] = ground_truth
        report["phi"] = phi
    return report


def _report_chunk(args):
    chunk, config, origin, truth, skipped = args
    return [class_report(o, config, origin, truth.get(o.class_id), skipped) for o in chunk]


def estimate_table(
    table: MentionTable,
    config: EstimateConfig,
    ground_truth: dict[str, float] | None = None,
    workers: int = 1,
) -> tuple[list[dict], dict[str, int]]:
    """Reports for every class in ``table``, sorted by class id."""
    groups, origin, pre_origin = group_observations(table, config.origin, config.period_length)
    skipped = {"malformed": table.malformed, "pre_origin": pre_origin}
    kept = [g for g in groups if g.n >= config.min_observations]
    counters = dict(skipped, classes=len(groups), below_min_observations=len(groups) - len(kept))
    truth = ground_truth or {}
    if workers <= 1 or len(kept) < 2:
        reports = _report_chunk((kept, config, origin, truth, skipped))
    else:
        size = max(1, -(-len(kept) // (workers * 4)))
        chunks = [kept[i : i + size] for i in range(0, len(kept), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_report_chunk, [(c, config, origin, truth, skipped) for c in chunks])
            reports = [r for part in parts for r in part]
    counters["reports"] = len(reports)
    return reports, counters
