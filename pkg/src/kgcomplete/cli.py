"""Command-line entry point: ``kgcomplete {resolve,estimate,simulate,rank}``.

Exit codes: 0 success, 1 usage error, 2 input parse failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from . import io as kio
from .estimators import DEFAULT_METHODS, Method
from .metrics import DEFAULT_HIGH, DEFAULT_LOW, DEFAULT_WINDOW, rank_by_convergence
from .observations import DEFAULT_PERIOD_DAYS, SECONDS_PER_DAY
from .ontology import DEFAULT_ENTITY_PATTERN, CompositeClassSpec
from .pipeline import (
    WORKERS_ENV,
    EstimateConfig,
    MentionTable,
    default_workers,
    estimate_table,
    resolve_file,
)
from .simulator import GENERATOR, load_scenario, simulate_indices

log = logging.getLogger("kgcomplete")

EXIT_OK, EXIT_USAGE, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _class_specs(args) -> list[CompositeClassSpec] | None:
    """Pair each ``--where`` with the preceding ``--class``."""
    if not args.class_args:
        if args.where_args:
            raise UsageError("--where needs a preceding --class")
        return None
    specs = []
    for base, wheres in args.class_args:
        filters = []
        for w in wheres:
            prop, sep, target = w.partition("=")
            if not sep or not prop or not target:
                raise UsageError(f"--where expects PROPERTY=TARGET, got {w!r}")
            filters.append((prop, target))
        specs.append(CompositeClassSpec(base, tuple(filters)))
    return specs


class _ClassAction(argparse.Action):
    def __call__(self, parser, ns, values, option_string=None):
        items = getattr(ns, "class_args", None) or []
        items.append((values, []))
        ns.class_args = items


class _WhereAction(argparse.Action):
    def __call__(self, parser, ns, values, option_string=None):
        ns.where_args = (getattr(ns, "where_args", None) or []) + [values]
        items = getattr(ns, "class_args", None)
        if items:
            items[-1][1].append(values)


def _methods(text: str) -> tuple[Method, ...]:
    try:
        return tuple(Method.parse(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _timestamp(text: str) -> int:
    try:
        return kio.parse_timestamp(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kgcomplete", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("resolve", help="join edits with an ontology snapshot into a mention file")
    p.add_argument("--edits", required=True, help="edit-history TSV")
    p.add_argument("--ontology", required=True, help="instanceOf/subclassOf TSV")
    p.add_argument("--properties", help="property-graph TSV, needed for --where filters")
    p.add_argument("--class", dest="class_args", action=_ClassAction, metavar="CLASS",
                   help="restrict output to this class (repeatable)")
    p.add_argument("--where", dest="where_args", action=_WhereAction, metavar="P=V",
                   help="filter the preceding --class to instances with edge P->V (repeatable)")
    p.add_argument("--entity-pattern", default=DEFAULT_ENTITY_PATTERN,
                   help="regex for entity tokens; other object values are literals")
    p.add_argument("-o", "--out", required=True, help="mention CSV to write")
    p.set_defaults(func=cmd_resolve, class_args=None, where_args=None)

    p = sub.add_parser("estimate", help="per-class estimate series, convergence and flags")
    p.add_argument("mentions", help="mention CSV")
    p.add_argument("-o", "--out", required=True, help="report file (JSON lines)")
    p.add_argument("--period-days", type=float, default=DEFAULT_PERIOD_DAYS)
    p.add_argument("--origin", type=_timestamp, help="period 0 start (default: first mention, midnight UTC)")
    p.add_argument("--window", "-w", type=_positive_int, default=DEFAULT_WINDOW)
    p.add_argument("--methods", type=_methods, default=DEFAULT_METHODS,
                   help="comma-separated subset of " + ",".join(m.value for m in Method))
    p.add_argument("--threshold-low", type=float, default=DEFAULT_LOW)
    p.add_argument("--threshold-high", type=float, default=DEFAULT_HIGH)
    p.add_argument("--ground-truth", help="CSV class,N")
    p.add_argument("--min-observations", type=int, default=0)
    p.add_argument("--gamma-literal", action="store_true",
                   help="alternative CV denominator n(n-1)-1 (comparison only)")
    p.add_argument("--rho-inclusive", action="store_true",
                   help="sum w+1 terms in rho (comparison only)")
    p.add_argument("--workers", type=_positive_int, default=None,
                   help=f"worker processes (default ${WORKERS_ENV} or 1)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="synthetic mention file from a scenario")
    p.add_argument("scenario", help="scenario JSON")
    p.add_argument("-o", "--out", required=True, help="mention CSV to write; metadata goes to OUT.meta.json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("rank", help="complete / incomplete candidate lists by rho")
    p.add_argument("reports", nargs="+", help="report files or directories of *.jsonl")
    p.add_argument("--method", type=Method.parse, default=Method.SOR)
    p.add_argument("--threshold-low", type=float, default=DEFAULT_LOW)
    p.add_argument("--threshold-high", type=float, default=DEFAULT_HIGH)
    p.add_argument("--out-dir", default=".", help="directory for complete.csv and incomplete.csv")
    p.set_defaults(func=cmd_rank)
    return parser


def _print_counts(counters: dict) -> None:
    print(" ".join(f"{k}={v}" for k, v in counters.items()))


def cmd_resolve(args) -> int:
    specs = _class_specs(args)
    if specs and any(s.filters for s in specs) and not args.properties:
        raise UsageError("--where filters need --properties")
    counters = resolve_file(
        args.edits,
        args.ontology,
        args.properties,
        specs,
        out_path=args.out,
        entity_pattern=args.entity_pattern,
    )
    _print_counts(counters)
    return EXIT_OK


def cmd_estimate(args) -> int:
    if args.period_days <= 0:
        raise UsageError("--period-days must be positive")
    config = EstimateConfig(
        period_length=round(args.period_days * SECONDS_PER_DAY),
        origin=args.origin,
        w=args.window,
        methods=args.methods,
        threshold_low=args.threshold_low,
        threshold_high=args.threshold_high,
        min_observations=args.min_observations,
        literal_gamma=args.gamma_literal,
        paper_rho_bounds=args.rho_inclusive,
    )
    truth = kio.read_ground_truth(args.ground_truth) if args.ground_truth else None
    table = MentionTable.load(args.mentions)
    workers = args.workers or default_workers()
    reports, counters = estimate_table(table, config, truth, workers)
    kio.write_reports(args.out, reports)
    _print_counts(counters)
    return EXIT_OK


def _atomic_write(path: Path, write) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    os.close(fd)
    try:
        write(tmp)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def cmd_simulate(args) -> int:
    try:
        spec = load_scenario(args.scenario)
    except OSError as exc:
        raise kio.InputError(f"cannot read {args.scenario}: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise kio.InputError(f"invalid scenario {args.scenario}: {exc}") from exc
    import numpy as np

    draws = simulate_indices(spec)
    periods = np.repeat(np.arange(spec.k, dtype=np.int64), [len(d) for d in draws])
    idx = np.concatenate(draws) if draws else np.zeros(0, np.int64)
    ts = spec.origin + periods * spec.period_length + spec.period_length // 2
    entities = [f"{spec.entity_prefix}{i + 1}" for i in idx.tolist()]
    out = Path(args.out)
    meta = {
        "scenario": spec.to_dict(),
        "generator": GENERATOR,
        "seed": spec.seed,
        "mentions": len(entities),
        "ground_truth": {spec.class_id: spec.population.N},
    }
    _atomic_write(out, lambda p: kio.write_mention_table(p, entities, [spec.class_id] * len(entities), ts))
    meta_path = out.with_name(out.name + ".meta.json")
    _atomic_write(meta_path, lambda p: Path(p).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8"))
    print(f"mentions={len(entities)} class={spec.class_id} N={spec.population.N}")
    return EXIT_OK


def cmd_rank(args) -> int:
    latest: dict[str, tuple[float | None, int]] = {}
    for path in kio.report_paths(args.reports):
        try:
            reports = list(kio.read_reports(path))
        except OSError as exc:
            raise kio.InputError(f"cannot read {path}: {exc}") from exc
        for report in reports:
            try:
                cls = report["class"]
                rho = report["rho"].get(args.method.value)
                d = report["D"]
            except (KeyError, TypeError, AttributeError) as exc:
                raise kio.InputError(f"{path}: malformed report ({exc})") from exc
            if cls in latest:
                log.warning("class %s appears in several reports; keeping %s", cls, path)
            latest[cls] = (rho, d)
    ranking = rank_by_convergence(
        ((c, r, d) for c, (r, d) in latest.items()), args.threshold_low, args.threshold_high
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    kio.write_ranking(out / "complete.csv", ranking.complete)
    kio.write_ranking(out / "incomplete.csv", ranking.incomplete)
    _print_counts(
        {
            "complete": len(ranking.complete),
            "incomplete": len(ranking.incomplete),
            "undefined": ranking.excluded,
            "classes": len(latest),
        }
    )
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"kgcomplete: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except kio.InputError as exc:
        print(f"kgcomplete: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
