"""Command line interface.

Subcommands: index, ce, bench, regions, stats. Machine-readable output via
--json. Exit codes: 0 success, 1 usage or input error, 2 search ended with
no candidate (no target region, infeasible constraints, no qualifying row),
3 internal error.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .bench import ALL_METHODS, format_report, run_benchmark
from .dataio import load_csv
from .docio import canonical_dumps
from .engine import (
    CEQuery,
    TargetSet,
    build_index,
    deserialize_index,
    find_ce,
    serialize_index,
)
from .errors import (
    CappedRegionSetError,
    CESearchError,
    LireError,
    NumericalDiagnosticError,
    QueryValidationError,
)
from .forest import forest_stats, load_forest
from .geometry import METRIC_L1, METRIC_L2SQ, DistanceMetric
from .regions import DEFAULT_CAP, MODE_BY_DEPTH, MODE_BY_TREES, region_growth_curve


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the contract here is 1
    def error(self, message):
        raise _UsageError(message)


def _parse_float(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise _UsageError(f"bad {what}: {text!r}") from None


def _parse_vector(text: str) -> np.ndarray:
    return np.array([_parse_float(p, "source entry") for p in text.split(",")])


def _parse_interval(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise _UsageError(f"intervals look like LO:HI, got {text!r}")
    return _parse_float(parts[0], "interval end"), _parse_float(parts[1], "interval end")


def _parse_assignment(text: str) -> tuple[int, str]:
    head, sep, tail = text.partition("=")
    if not sep or not head.isdigit():
        raise _UsageError(f"feature assignments look like D=..., got {text!r}")
    return int(head), tail


def _add_data_flags(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--data", required=required, help="dataset CSV, one row per instance")
    p.add_argument("--header", action="store_true", help="skip the first CSV line")
    p.add_argument("--label-col", type=int, default=None,
                   help="drop this column before using the CSV")


def _build_parser() -> _Parser:
    parser = _Parser(prog="lire", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build a live-region index and write it to a file")
    p.add_argument("--model", required=True)
    _add_data_flags(p)
    p.add_argument("--index", required=True, help="output path for the serialized index")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_index)

    p = sub.add_parser("ce", help="find the closest counterfactual")
    p.add_argument("--model", required=True)
    p.add_argument("--index", help="serialized index; otherwise built from --data")
    _add_data_flags(p, required=False)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--source", help="comma-separated feature values")
    src.add_argument("--source-row", type=int, help="row of --data to explain")
    p.add_argument("--target-class", type=int, action="append", default=[])
    p.add_argument("--target-interval", action="append", default=[], metavar="LO:HI")
    p.add_argument("--metric", choices=[METRIC_L2SQ, METRIC_L1], default=METRIC_L2SQ)
    p.add_argument("--fix", action="append", default=[], metavar="D=V")
    p.add_argument("--bound", action="append", default=[], metavar="D=LO:HI")
    p.add_argument("--margin", type=float, default=0.0)
    p.add_argument("--budget-regions", type=int, default=None)
    p.add_argument("--timeout-ms", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_ce)

    p = sub.add_parser("bench", help="compare search methods on sampled queries")
    p.add_argument("--model", required=True)
    _add_data_flags(p)
    p.add_argument("--queries", type=int, default=10)
    p.add_argument("--methods", default=",".join(ALL_METHODS))
    p.add_argument("--metric", choices=[METRIC_L2SQ, METRIC_L1], default=METRIC_L2SQ)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--budget-regions", type=int, default=None)
    p.add_argument("--timeout-ms", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("regions", help="partition growth curve")
    p.add_argument("--model", required=True)
    _add_data_flags(p, required=False)
    p.add_argument("--mode", choices=[MODE_BY_TREES, MODE_BY_DEPTH], default=MODE_BY_TREES)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_regions)

    p = sub.add_parser("stats", help="forest structure summary")
    p.add_argument("--model", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_stats)

    return parser


def _cmd_index(args) -> int:
    forest = load_forest(args.model)
    X = load_csv(args.data, args.header, args.label_col)
    index = build_index(forest, X)
    text = serialize_index(index)
    with open(args.index, "w", encoding="utf-8") as fh:
        fh.write(text)
    if args.json:
        print(canonical_dumps({"M": index.M, "path": args.index, "groups": index.group_sizes()}))
    else:
        print(f"indexed {index.M} live regions over {len(X)} rows -> {args.index}")
    return 0


def _build_query(args) -> CEQuery:
    if args.target_class and args.target_interval:
        raise _UsageError("give either --target-class or --target-interval, not both")
    if args.target_class:
        target = TargetSet.for_classes(args.target_class)
    elif args.target_interval:
        target = TargetSet.for_intervals([_parse_interval(t) for t in args.target_interval])
    else:
        raise _UsageError("a target is required (--target-class or --target-interval)")

    if args.source is not None:
        source = _parse_vector(args.source)
    else:
        if args.data is None:
            raise _UsageError("--source-row needs --data")
        X = load_csv(args.data, args.header, args.label_col)
        if not 0 <= args.source_row < len(X):
            raise _UsageError(f"--source-row {args.source_row} out of range for {len(X)} rows")
        source = X[args.source_row].copy()

    fixed = {}
    for item in args.fix:
        d, raw = _parse_assignment(item)
        fixed[d] = _parse_float(raw, "fixed value")
    bounds = {}
    for item in args.bound:
        d, raw = _parse_assignment(item)
        bounds[d] = _parse_interval(raw)

    try:
        return CEQuery(
            source,
            target,
            DistanceMetric(args.metric),
            fixed,
            bounds,
            args.margin,
            args.budget_regions,
            args.timeout_ms,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _cmd_ce(args) -> int:
    forest = load_forest(args.model)
    query = _build_query(args)
    if args.index:
        with open(args.index, "r", encoding="utf-8") as fh:
            index = deserialize_index(fh.read(), forest)
    elif args.data:
        index = build_index(forest, load_csv(args.data, args.header, args.label_col))
    else:
        raise _UsageError("ce needs --index or --data to know the live regions")
    res = find_ce(forest, index, query)
    if args.json:
        print(canonical_dumps(res.to_doc()))
    else:
        print(f"x: [{', '.join(repr(float(v)) for v in res.x)}]")
        print(f"distance: {res.distance!r}")
        print(f"region: {res.region}")
        print(f"witness: {res.witness}")
        print(f"feasible: {'yes' if res.feasible else 'no'}")
        print(f"scanned: {res.scanned}")
        print(f"anytime: {'yes' if res.anytime else 'no'}")
        print(f"method: {res.method}")
    return 0


def _cmd_bench(args) -> int:
    forest = load_forest(args.model)
    X = load_csv(args.data, args.header, args.label_col)
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    for m in methods:
        if m not in ALL_METHODS:
            raise _UsageError(f"unknown method {m!r}; pick from {','.join(ALL_METHODS)}")
    report = run_benchmark(
        forest,
        X,
        n_queries=args.queries,
        methods=methods,
        metric=DistanceMetric(args.metric),
        seed=args.seed,
        cap=args.cap,
        budget_regions=args.budget_regions,
        budget_millis=args.timeout_ms,
    )
    print(canonical_dumps(report.to_doc()) if args.json else format_report(report))
    return 0


def _cmd_regions(args) -> int:
    forest = load_forest(args.model)
    X = load_csv(args.data, args.header, args.label_col) if args.data else None
    curve = region_growth_curve(forest, X, args.mode, args.cap)
    if args.json:
        print(canonical_dumps(curve.to_doc()))
    else:
        print(f"{'step':>5} {'bound':>14} {'nonempty':>10} {'live':>8} capped")
        for s in curve.steps:
            nonempty = "-" if s.nonempty is None else s.nonempty
            live = "-" if s.live is None else s.live
            print(f"{s.step:>5} {s.upper_bound:>14} {nonempty:>10} {live:>8} "
                  f"{'yes' if s.capped else 'no'}")
    return 0


def _cmd_stats(args) -> int:
    forest = load_forest(args.model)
    st = forest_stats(forest)
    doc = {
        "task": forest.task,
        "D": forest.D,
        "K": forest.K,
        "trees": st.n_trees,
        "mean_depth": st.mean_depth,
        "mean_leaves": st.mean_leaves,
    }
    if args.json:
        print(canonical_dumps(doc))
    else:
        for key, value in doc.items():
            print(f"{key}: {value}")
    return 0


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (CESearchError, CappedRegionSetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalDiagnosticError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3
    except QueryValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (LireError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # anything unforeseen is an internal error
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


def main(argv=None) -> int:
    return run(argv)
