"""Benchmark harness comparing the search methods on one forest and dataset.

Sources are dataset rows drawn with a seeded generator; targets are built
from the live index so every query is answerable. Distances are reported in
display units: euclidean (the square root) for the l2sq metric, manhattan
as-is, and each method's mean is also normalized by the live search's mean.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .engine import (
    METHOD_DATASET,
    METHOD_EXACT,
    METHOD_LIRE,
    CEQuery,
    LiveRegionIndex,
    TargetSet,
    build_index,
    dataset_search,
    exact_search,
    find_ce,
)
from .errors import CappedRegionSetError, CESearchError
from .forest import TASK_CLASSIFICATION, Forest, check_dataset, predict_matrix
from .geometry import METRIC_L2SQ, DistanceMetric
from .regions import DEFAULT_CAP, enumerate_nonempty_regions

ALL_METHODS = (METHOD_LIRE, METHOD_DATASET, METHOD_EXACT)


@dataclass
class MethodSummary:
    method: str
    candidates: int
    failures: int
    feasible_rate: float
    mean_distance: float | None
    stdev_distance: float | None
    normalized_mean: float | None
    normalized_stdev: float | None
    mean_runtime_ms: float
    stdev_runtime_ms: float

    def to_doc(self) -> dict:
        return {
            "method": self.method,
            "candidates": self.candidates,
            "failures": self.failures,
            "feasible_rate": self.feasible_rate,
            "mean_distance": self.mean_distance,
            "stdev_distance": self.stdev_distance,
            "normalized_mean": self.normalized_mean,
            "normalized_stdev": self.normalized_stdev,
            "mean_runtime_ms": self.mean_runtime_ms,
            "stdev_runtime_ms": self.stdev_runtime_ms,
        }


@dataclass
class BenchmarkReport:
    config: dict
    methods: dict[str, MethodSummary]
    per_query: list[dict]

    def to_doc(self) -> dict:
        return {
            "config": self.config,
            "methods": {name: s.to_doc() for name, s in self.methods.items()},
            "per_query": self.per_query,
        }


def _pick_targets(
    forest: Forest, index: LiveRegionIndex, X: np.ndarray, sources: np.ndarray
) -> list[TargetSet]:
    """One guaranteed-live target per source row."""
    preds = predict_matrix(forest, X[sources])
    if forest.task == TASK_CLASSIFICATION:
        present = [k for k in range(forest.K) if index.offsets[k + 1] > index.offsets[k]]
        if len(present) < 2:
            raise ValueError("benchmark needs at least two live predicted labels")
        targets = []
        for vec in preds:
            label = int(np.argmax(vec))
            later = [k for k in present if k > label]
            pick = later[0] if later else present[0]
            if pick == label:
                pick = next(k for k in present if k != label)
            targets.append(TargetSet.for_classes([pick]))
        return targets
    values = index.outputs[:, 0]
    if float(values[0]) == float(values[-1]):
        raise ValueError("benchmark needs spread in live outputs")
    # nearest-rank quantiles: endpoints are actual live outputs, so each
    # interval is guaranteed to contain a live value (and its witness row)
    q10, q30, median, q70, q90 = (
        float(np.quantile(values, q, method="nearest")) for q in (0.1, 0.3, 0.5, 0.7, 0.9)
    )
    targets = []
    for vec in preds:
        if float(vec[0]) <= median:
            targets.append(TargetSet.for_intervals([[q70, q90]]))
        else:
            targets.append(TargetSet.for_intervals([[q10, q30]]))
    return targets


def _display_distance(metric: DistanceMetric, value: float) -> float:
    return math.sqrt(value) if metric.kind == METRIC_L2SQ else value


def _mean_std(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return float("nan"), float("nan")
    if arr.size == 1:
        return float(arr[0]), 0.0
    return float(arr.mean()), float(arr.std(ddof=1))


def run_benchmark(
    forest: Forest,
    X,
    n_queries: int = 10,
    methods: tuple[str, ...] = ALL_METHODS,
    metric: DistanceMetric | None = None,
    seed: int = 0,
    cap: int = DEFAULT_CAP,
    budget_regions: int | None = None,
    budget_millis: int | None = None,
) -> BenchmarkReport:
    X = check_dataset(forest, X)
    metric = metric or DistanceMetric(METRIC_L2SQ)
    for m in methods:
        if m not in ALL_METHODS:
            raise ValueError(f"unknown method {m!r}")

    t0 = time.perf_counter()
    index = build_index(forest, X)
    index_ms = (time.perf_counter() - t0) * 1000.0

    region_set = None
    if METHOD_EXACT in methods:
        region_set = enumerate_nonempty_regions(forest, cap)
        if region_set.capped:
            raise CappedRegionSetError(
                f"enumeration exceeded the cap of {cap}; exact search is unavailable"
            )

    rng = np.random.default_rng(seed)
    n = min(n_queries, len(X))
    sources = np.sort(rng.choice(len(X), size=n, replace=False))
    targets = _pick_targets(forest, index, X, sources)

    runs: dict[str, dict] = {
        m: {"distances": [], "runtimes": [], "feasible": 0, "failures": 0} for m in methods
    }
    per_query = []
    for qi in range(n):
        row = int(sources[qi])
        query = CEQuery(
            X[row].copy(),
            targets[qi],
            metric,
            budget_regions=budget_regions,
            budget_millis=budget_millis,
        )
        entry: dict = {"source_row": row, "target": targets[qi].to_doc(), "results": {}}
        for m in methods:
            t0 = time.perf_counter()
            try:
                if m == METHOD_LIRE:
                    res = find_ce(forest, index, query)
                elif m == METHOD_DATASET:
                    res = dataset_search(forest, X, query)
                else:
                    res = exact_search(forest, region_set, query)
            except CESearchError as exc:
                runs[m]["failures"] += 1
                entry["results"][m] = {"error": str(exc)}
                continue
            ms = (time.perf_counter() - t0) * 1000.0
            shown = _display_distance(metric, res.distance)
            runs[m]["distances"].append(shown)
            runs[m]["runtimes"].append(ms)
            runs[m]["feasible"] += int(res.feasible)
            entry["results"][m] = {
                "distance": shown,
                "runtime_ms": ms,
                "feasible": res.feasible,
                "scanned": res.scanned,
            }
        per_query.append(entry)

    lire_mean = None
    if METHOD_LIRE in runs and runs[METHOD_LIRE]["distances"]:
        lire_mean = _mean_std(runs[METHOD_LIRE]["distances"])[0]

    summaries = {}
    for m in methods:
        r = runs[m]
        mean_d, std_d = _mean_std(r["distances"]) if r["distances"] else (None, None)
        mean_t, std_t = _mean_std(r["runtimes"]) if r["runtimes"] else (0.0, 0.0)
        norm = norm_std = None
        if mean_d is not None and lire_mean:
            norm = mean_d / lire_mean
            norm_std = std_d / lire_mean
        candidates = {
            METHOD_LIRE: index.M,
            METHOD_DATASET: len(X),
            METHOD_EXACT: region_set.M if region_set is not None else 0,
        }[m]
        summaries[m] = MethodSummary(
            m, candidates, r["failures"], r["feasible"] / n if n else 0.0,
            mean_d, std_d, norm, norm_std, mean_t, std_t,
        )

    config = {
        "task": forest.task,
        "N": int(len(X)),
        "D": forest.D,
        "K": forest.K,
        "T": forest.T,
        "metric": metric.kind,
        "seed": int(seed),
        "n_queries": int(n),
        "methods": list(methods),
        "index_build_ms": index_ms,
        "M_live": index.M,
    }
    if region_set is not None:
        config["M_nonempty"] = region_set.M
    if budget_regions is not None:
        config["budget_regions"] = budget_regions
    if budget_millis is not None:
        config["budget_millis"] = budget_millis
    return BenchmarkReport(config, summaries, per_query)


def format_report(report: BenchmarkReport) -> str:
    """Plain-text table of the report."""
    lines = []
    cfg = report.config
    lines.append(
        f"task={cfg['task']} N={cfg['N']} D={cfg['D']} T={cfg['T']} "
        f"metric={cfg['metric']} queries={cfg['n_queries']} seed={cfg['seed']}"
    )
    header = (
        f"{'method':<9} {'distance':>18} {'normalized':>18} "
        f"{'runtime ms':>16} {'feas%':>6} {'cands':>8}"
    )
    lines.append(header)
    lines.append("-" * len(header))
    for name, s in report.methods.items():
        if s.mean_distance is None:
            dist = norm = "n/a"
        else:
            dist = f"{s.mean_distance:.4f} +- {s.stdev_distance:.4f}"
            norm = f"{s.normalized_mean:.3f} +- {s.normalized_stdev:.3f}"
        runtime = f"{s.mean_runtime_ms:.2f} +- {s.stdev_runtime_ms:.2f}"
        lines.append(
            f"{name:<9} {dist:>18} {norm:>18} {runtime:>16} "
            f"{100.0 * s.feasible_rate:>5.1f} {s.candidates:>8}"
        )
    return "\n".join(lines)
