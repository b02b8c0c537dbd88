"""Readers and writers for the on-disk formats.

Mention files are CSV with header ``entity,class,timestamp``. Ontology,
property-graph and edit-history files are headerless TSV (a first line
equal to the column names is tolerated and skipped). Timestamps are epoch
seconds or ISO-8601; naive ISO times are taken as UTC. Malformed lines are
counted, never fatal.
"""
from __future__ import annotations

import csv
import json
import os
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np
import pandas as pd
import pyarrow as pa
import pyarrow.compute as pc
from pyarrow import csv as pacsv

from .observations import Mention

MENTION_COLUMNS = ("entity", "class", "timestamp")
ONTOLOGY_COLUMNS = ("entity", "relation", "target")
PROPERTY_COLUMNS = ("entity", "property", "target")
EDIT_COLUMNS = ("subject", "property", "object", "timestamp", "user")

INVALID_TIMESTAMP = -1


class InputError(Exception):
    """An input file cannot be read at all."""


def _first_line(path) -> str | None:
    with open(path, "rb") as fh:
        for raw in fh:
            line = raw.decode("utf-8", errors="replace").strip()
            if line:
                return line
    return None


def read_delimited(path, columns: tuple[str, ...], delimiter: str) -> tuple[pa.Table, int]:
    """Read a delimited file into an all-string table.

    Returns the table and the number of rows skipped for having the wrong
    number of fields. A header line matching ``columns`` is skipped.
    """
    path = os.fspath(path)
    try:
        first = _first_line(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    empty = pa.table({c: pa.array([], pa.string()) for c in columns})
    if first is None:
        return empty, 0
    header = [h.strip().strip('"') for h in first.split(delimiter)]
    skip = 1 if header == list(columns) else 0

    bad = 0

    def on_invalid(row):
        nonlocal bad
        bad += 1
        return "skip"

    try:
        table = pacsv.read_csv(
            path,
            read_options=pacsv.ReadOptions(
                column_names=list(columns), skip_rows=skip, block_size=1 << 24
            ),
            parse_options=pacsv.ParseOptions(
                delimiter=delimiter,
                quote_char='"' if delimiter == "," else False,
                invalid_row_handler=on_invalid,
            ),
            convert_options=pacsv.ConvertOptions(
                column_types={c: pa.string() for c in columns},
                strings_can_be_null=False,
                quoted_strings_can_be_null=False,
            ),
        )
    except pa.ArrowInvalid as exc:
        if "Empty CSV file" in str(exc):
            return empty, bad
        raise InputError(f"cannot parse {path}: {exc}") from exc
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return table, bad


def _flat(arr) -> pa.Array:
    if isinstance(arr, pa.ChunkedArray):
        arr = arr.combine_chunks() if arr.num_chunks else pa.array([], arr.type)
    return arr


def parse_timestamps(values) -> np.ndarray:
    """Vectorized timestamp parsing; unparsable or negative entries become -1."""
    arr = _flat(pa.array(values, pa.string()) if not isinstance(values, (pa.Array, pa.ChunkedArray)) else values)
    out = np.full(len(arr), INVALID_TIMESTAMP, dtype=np.int64)
    if len(arr) == 0:
        return out
    arr = pc.utf8_trim_whitespace(arr)
    numeric = pc.fill_null(pc.match_substring_regex(arr, r"^[0-9]{1,18}$"), False)
    mask = numeric.to_numpy(zero_copy_only=False)
    if mask.any():
        out[mask] = pc.cast(pc.filter(arr, numeric), pa.int64()).to_numpy(zero_copy_only=False)
    rest = ~mask
    if rest.any():
        text = pc.filter(arr, pc.invert(numeric)).to_pandas()
        with np.errstate(all="ignore"):
            parsed = pd.to_datetime(text, format="ISO8601", utc=True, errors="coerce")
        ns = parsed.dt.tz_convert(None).to_numpy(dtype="datetime64[ns]").view(np.int64)
        ok = ~parsed.isna().to_numpy()
        secs = np.where(ok, ns // 1_000_000_000, INVALID_TIMESTAMP)
        secs[secs < 0] = INVALID_TIMESTAMP
        out[rest] = secs
    return out


def parse_timestamp(value: str) -> int:
    """Parse one timestamp; raises ``ValueError`` if it is not valid."""
    ts = int(parse_timestamps([value])[0])
    if ts == INVALID_TIMESTAMP:
        raise ValueError(f"invalid timestamp {value!r}")
    return ts


def read_mentions(path) -> tuple[list[Mention], int]:
    """Small-scale reader returning mention objects and the malformed-line count."""
    table, bad = read_delimited(path, MENTION_COLUMNS, ",")
    ts = parse_timestamps(table.column("timestamp"))
    out = []
    for e, c, t in zip(table.column("entity").to_pylist(), table.column("class").to_pylist(), ts.tolist()):
        if not e or not c or t < 0:
            bad += 1
            continue
        out.append(Mention(e, c, t))
    return out, bad


def write_mention_table(path, entity, klass, timestamp) -> None:
    table = pa.table(
        {
            "entity": pa.array(entity, pa.string()) if not isinstance(entity, (pa.Array, pa.ChunkedArray)) else entity,
            "class": pa.array(klass, pa.string()) if not isinstance(klass, (pa.Array, pa.ChunkedArray)) else klass,
            "timestamp": pa.array(np.asarray(timestamp, dtype=np.int64)),
        }
    )
    with open(path, "wb") as fh:
        fh.write(b"entity,class,timestamp\n")
        if table.num_rows:
            pacsv.write_csv(
                table,
                fh,
                write_options=pacsv.WriteOptions(include_header=False, quoting_style="needed"),
            )


def write_mentions(path, mentions: Iterable[Mention]) -> int:
    mentions = list(mentions)
    write_mention_table(
        path,
        [m.entity_id for m in mentions],
        [m.class_id for m in mentions],
        [m.timestamp for m in mentions],
    )
    return len(mentions)


def iter_rows(table: pa.Table, columns: tuple[str, ...]) -> Iterator[tuple[str, ...]]:
    cols = [table.column(c).to_pylist() for c in columns]
    return zip(*cols)


def read_ground_truth(path) -> dict[str, float]:
    """Two-column CSV ``class,N``; a header row is optional."""
    truth = {}
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    with fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            if len(row) != 2:
                raise InputError(f"{path}: expected 2 columns, got {row!r}")
            cls, value = row[0].strip(), row[1].strip()
            try:
                truth[cls] = float(value)
            except ValueError:
                if not truth and cls.lower() == "class":
                    continue
                raise InputError(f"{path}: bad ground truth {value!r} for {cls}") from None
    return truth


def write_reports(path, reports: Iterable[dict]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for report in reports:
            fh.write(json.dumps(report, allow_nan=False))
            fh.write("\n")
            count += 1
    return count


def read_reports(path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from exc


def report_paths(inputs: Iterable[str]) -> list[Path]:
    paths = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.jsonl")))
        else:
            paths.append(p)
    return paths


def write_ranking(path, entries) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["class", "rho", "D"])
        for e in entries:
            writer.writerow([e.class_id, repr(e.rho), e.D])
