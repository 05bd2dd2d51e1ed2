"""Counterfactual search over indexed live regions.

The index holds every region of the forest partition that contains at least
one dataset row, grouped so that selecting the regions whose output lies in
a target set is a couple of lookups. A query then projects its source
instance onto each candidate region and keeps the closest; for axis-aligned
forests that is a single vectorized pass over the region boxes.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .docio import canonical_dumps, decode_float, encode_float
from .errors import (
    AllRegionsInfeasibleError,
    CappedRegionSetError,
    IndexFormatError,
    InfeasiblePolytopeError,
    NoLiveTargetRegionError,
    NoQualifyingRowError,
    QueryValidationError,
    TargetTaskMismatchError,
)
from .forest import (
    TASK_CLASSIFICATION,
    TASK_REGRESSION,
    Forest,
    check_dataset,
    leaf_tuple,
    predict,
    predict_matrix,
)
from .geometry import (
    METRIC_L1,
    METRIC_L2SQ,
    Box,
    DistanceMetric,
    Halfspace,
    feasible_point,
    inset_point,
    min_l1_to_polytope,
    project_to_box,
    project_to_polytope_l2,
    region_constraints,
)
from .regions import RegionSet, enumerate_live_regions, interior_box_point

INDEX_VERSION = 1
SCAN_CHUNK = 131072
NUDGE_FLOOR = 1e-9

METHOD_LIRE = "lire"
METHOD_EXACT = "exact"
METHOD_DATASET = "dataset"


# ---------------------------------------------------------------------------
# targets and queries


@dataclass(frozen=True)
class TargetSet:
    """Admissible forest outputs: a set of class labels, or a union of
    closed value intervals for regressors."""

    kind: str
    classes: tuple[int, ...] = ()
    intervals: tuple[tuple[float, float], ...] = ()

    @staticmethod
    def for_classes(classes: Sequence[int]) -> "TargetSet":
        cs = sorted({int(c) for c in classes})
        if not cs or cs[0] < 0:
            raise QueryValidationError("target classes must be a non-empty set of labels >= 0")
        return TargetSet("classes", classes=tuple(cs))

    @staticmethod
    def for_intervals(pairs: Sequence[Sequence[float]]) -> "TargetSet":
        iv = []
        for pair in pairs:
            if len(pair) != 2:
                raise QueryValidationError("each interval needs exactly two endpoints")
            lo, hi = float(pair[0]), float(pair[1])
            if np.isnan(lo) or np.isnan(hi) or lo > hi:
                raise QueryValidationError(f"bad interval [{lo}, {hi}]")
            iv.append((lo, hi))
        if not iv:
            raise QueryValidationError("target intervals must be non-empty")
        iv.sort()
        merged = [iv[0]]
        for lo, hi in iv[1:]:
            if lo <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
            else:
                merged.append((lo, hi))
        return TargetSet("intervals", intervals=tuple(merged))

    def contains_label(self, label: int) -> bool:
        return label in self.classes

    def contains_value(self, value: float) -> bool:
        return any(lo <= value <= hi for lo, hi in self.intervals)

    def to_doc(self) -> dict:
        if self.kind == "classes":
            return {"classes": list(self.classes)}
        return {"intervals": [[encode_float(lo), encode_float(hi)] for lo, hi in self.intervals]}

    @staticmethod
    def from_doc(doc: dict) -> "TargetSet":
        if not isinstance(doc, dict) or len(doc) != 1:
            raise QueryValidationError("target must be {'classes': [...]} or {'intervals': [...]}")
        if "classes" in doc:
            return TargetSet.for_classes(doc["classes"])
        if "intervals" in doc:
            return TargetSet.for_intervals(
                [[decode_float(e) for e in pair] for pair in doc["intervals"]]
            )
        raise QueryValidationError("target must name classes or intervals")


def _output_in_target(task: str, target: TargetSet, vector: np.ndarray) -> bool:
    if task == TASK_CLASSIFICATION:
        return target.contains_label(int(np.argmax(vector)))
    return target.contains_value(float(vector[0]))


def _check_target_task(task: str, target: TargetSet) -> None:
    if task == TASK_CLASSIFICATION and target.kind != "classes":
        raise TargetTaskMismatchError("classification targets must be class labels")
    if task == TASK_REGRESSION and target.kind != "intervals":
        raise TargetTaskMismatchError("regression targets must be value intervals")


@dataclass(frozen=True)
class CEQuery:
    """One counterfactual request against a fixed source instance.

    ``fixed`` pins features to exact values, ``bounds`` confines them to
    closed intervals, ``margin`` asks for a point at least that far inside
    the winning region instead of on its boundary. Budgets make the search
    anytime: it stops after that many candidate regions or roughly that
    many milliseconds and returns the best so far.
    """

    source: np.ndarray
    target: TargetSet
    metric: DistanceMetric = field(default_factory=lambda: DistanceMetric(METRIC_L2SQ))
    fixed: dict[int, float] = field(default_factory=dict)
    bounds: dict[int, tuple[float, float]] = field(default_factory=dict)
    margin: float = 0.0
    budget_regions: int | None = None
    budget_millis: int | None = None


def _validate_query(forest: Forest, query: CEQuery) -> np.ndarray:
    x = np.asarray(query.source, dtype=np.float64)
    if x.shape != (forest.D,):
        raise QueryValidationError(f"source has shape {x.shape}, expected ({forest.D},)")
    if not np.isfinite(x).all():
        raise QueryValidationError("source must be finite")
    query.metric.check_dim(forest.D)
    for d, v in query.fixed.items():
        if not 0 <= d < forest.D:
            raise QueryValidationError(f"fixed feature {d} out of range")
        if not np.isfinite(v):
            raise QueryValidationError(f"fixed value for feature {d} must be finite")
    for d, (lo, hi) in query.bounds.items():
        if not 0 <= d < forest.D:
            raise QueryValidationError(f"bounded feature {d} out of range")
        if d in query.fixed:
            raise QueryValidationError(f"feature {d} is both fixed and bounded")
        if np.isnan(lo) or np.isnan(hi) or lo > hi or lo == np.inf or hi == -np.inf:
            raise QueryValidationError(f"bad bounds [{lo}, {hi}] for feature {d}")
    if not np.isfinite(query.margin) or query.margin < 0:
        raise QueryValidationError("margin must be finite and >= 0")
    for name, b in (("regions", query.budget_regions), ("millis", query.budget_millis)):
        if b is not None and (not isinstance(b, int) or b < 1):
            raise QueryValidationError(f"budget {name} must be a positive integer")
    return x


def query_from_doc(doc: dict) -> CEQuery:
    """Decode the query exchange document. Unknown keys are rejected."""
    if not isinstance(doc, dict):
        raise QueryValidationError("query must be an object")
    allowed = {"source", "metric", "weights", "target", "fix", "bounds", "margin", "budget"}
    unknown = set(doc) - allowed
    if unknown:
        raise QueryValidationError(f"unknown query keys: {sorted(unknown)}")
    if "source" not in doc or "target" not in doc:
        raise QueryValidationError("query needs 'source' and 'target'")
    try:
        source = np.array([decode_float(v) for v in doc["source"]], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise QueryValidationError(f"bad source: {exc}") from exc
    kind = doc.get("metric", METRIC_L2SQ)
    if kind not in (METRIC_L2SQ, METRIC_L1):
        raise QueryValidationError(f"unknown metric {kind!r}")
    weights = None
    if "weights" in doc:
        try:
            weights = np.array([decode_float(v) for v in doc["weights"]], dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise QueryValidationError(f"bad weights: {exc}") from exc
    try:
        metric = DistanceMetric(kind, weights)
    except ValueError as exc:
        raise QueryValidationError(str(exc)) from exc
    target = TargetSet.from_doc(doc["target"])

    def feature_id(raw) -> int:
        try:
            return int(raw)
        except (TypeError, ValueError):
            raise QueryValidationError(f"bad feature id {raw!r}") from None

    fixed = {}
    for key, v in (doc.get("fix") or {}).items():
        fixed[feature_id(key)] = decode_float(v)
    bounds = {}
    for key, pair in (doc.get("bounds") or {}).items():
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise QueryValidationError(f"bounds for feature {key} need two endpoints")
        bounds[feature_id(key)] = (decode_float(pair[0]), decode_float(pair[1]))
    margin = float(doc.get("margin", 0.0))
    budget = doc.get("budget") or {}
    if not isinstance(budget, dict) or set(budget) - {"regions", "millis"}:
        raise QueryValidationError("budget allows only 'regions' and 'millis'")
    return CEQuery(
        source,
        target,
        metric,
        fixed,
        bounds,
        margin,
        budget.get("regions"),
        budget.get("millis"),
    )


def query_to_doc(query: CEQuery) -> dict:
    doc: dict = {
        "source": [float(v) for v in np.asarray(query.source).ravel()],
        "metric": query.metric.kind,
        "target": query.target.to_doc(),
    }
    if query.metric.weights is not None:
        doc["weights"] = [float(w) for w in query.metric.weights]
    if query.fixed:
        doc["fix"] = {str(d): float(v) for d, v in sorted(query.fixed.items())}
    if query.bounds:
        doc["bounds"] = {
            str(d): [encode_float(lo), encode_float(hi)]
            for d, (lo, hi) in sorted(query.bounds.items())
        }
    if query.margin:
        doc["margin"] = float(query.margin)
    budget = {}
    if query.budget_regions is not None:
        budget["regions"] = int(query.budget_regions)
    if query.budget_millis is not None:
        budget["millis"] = int(query.budget_millis)
    if budget:
        doc["budget"] = budget
    return doc


@dataclass(frozen=True)
class CEResult:
    """Outcome of one search: the counterfactual point, its distance to the
    source, the region that produced it, and bookkeeping. ``witness`` is the
    dataset row anchoring the region, or -1 when the method used none."""

    x: np.ndarray
    distance: float
    region: tuple[int, ...]
    witness: int
    feasible: bool
    scanned: int
    anytime: bool
    method: str

    def to_doc(self) -> dict:
        return {
            "x": [float(v) for v in self.x],
            "distance": float(self.distance),
            "region": [int(k) for k in self.region],
            "witness": int(self.witness),
            "feasible": bool(self.feasible),
            "scanned": int(self.scanned),
            "anytime": bool(self.anytime),
            "method": self.method,
        }


# ---------------------------------------------------------------------------
# the index


@dataclass
class LiveRegionIndex:
    """Live regions in query-ready order.

    Classification indexes are grouped by predicted label, lexicographic
    within each group, with ``offsets`` marking the K+1 group boundaries.
    Regression indexes are sorted by ascending output value. Axis-aligned
    forests also carry per-region boxes in ``lower``/``upper``.
    """

    task: str
    D: int
    K: int
    T: int
    keys: np.ndarray
    outputs: np.ndarray
    witnesses: list[list[int]]
    offsets: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    @property
    def M(self) -> int:
        return len(self.keys)

    @property
    def axis_aligned(self) -> bool:
        return self.lower is not None

    def labels(self) -> np.ndarray:
        return np.argmax(self.outputs, axis=1)

    def group_sizes(self) -> dict:
        if self.task == TASK_CLASSIFICATION:
            return {
                int(k): int(self.offsets[k + 1] - self.offsets[k]) for k in range(self.K)
            }
        return {"min": float(self.outputs[0, 0]), "max": float(self.outputs[-1, 0])}


def build_index(forest: Forest, X) -> LiveRegionIndex:
    """Enumerate live regions for the dataset and arrange them for search."""
    live = enumerate_live_regions(forest, X)
    keys, outputs = live.keys, live.outputs
    witnesses = live.witnesses
    lower, upper = live.lower, live.upper
    if forest.task == TASK_CLASSIFICATION:
        labels = np.argmax(outputs, axis=1)
        order = np.argsort(labels, kind="stable")
        offsets = np.searchsorted(labels[order], np.arange(forest.K + 1), side="left")
    else:
        order = np.argsort(outputs[:, 0], kind="stable")
        offsets = None
    keys = keys[order]
    outputs = outputs[order]
    witnesses = [witnesses[i] for i in order]
    if lower is not None:
        lower, upper = lower[order], upper[order]
    return LiveRegionIndex(
        forest.task, forest.D, forest.K, forest.T, keys, outputs, witnesses,
        offsets=offsets, lower=lower, upper=upper,
    )


def serialize_index(index: LiveRegionIndex) -> str:
    """Canonical JSON for the index; identical indexes serialize to
    identical bytes."""
    doc = {
        "version": INDEX_VERSION,
        "provenance": "live",
        "task": index.task,
        "D": index.D,
        "K": index.K,
        "T": index.T,
        "M": index.M,
        "keys": index.keys.tolist(),
        "outputs": index.outputs.tolist(),
        "witnesses": [list(map(int, rows)) for rows in index.witnesses],
    }
    if index.task == TASK_CLASSIFICATION:
        doc["groups"] = {"offsets": index.offsets.tolist()}
    else:
        doc["groups"] = {"sorted_by_output": True}
    if index.lower is not None:
        doc["boxes"] = {
            "A": [[encode_float(v) for v in col] for col in index.lower.T.tolist()],
            "B": [[encode_float(v) for v in col] for col in index.upper.T.tolist()],
        }
    return canonical_dumps(doc)


def _expect(cond: bool, msg: str) -> None:
    if not cond:
        raise IndexFormatError(msg)


def deserialize_index(text: str, forest: Forest | None = None) -> LiveRegionIndex:
    """Parse and structurally validate a serialized index. When a forest is
    given, key ranges and dimensions are checked against it."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IndexFormatError(f"invalid JSON: {exc}") from exc
    _expect(isinstance(doc, dict), "index document must be an object")
    known = {
        "version", "provenance", "task", "D", "K", "T", "M",
        "keys", "outputs", "witnesses", "groups", "boxes",
    }
    _expect(not set(doc) - known, f"unknown index keys: {sorted(set(doc) - known)}")
    _expect(doc.get("version") == INDEX_VERSION, "unsupported index version")
    _expect(doc.get("provenance") == "live", "index provenance must be 'live'")
    task = doc.get("task")
    _expect(task in (TASK_CLASSIFICATION, TASK_REGRESSION), "bad task")
    D, K, T, M = (doc.get(k) for k in ("D", "K", "T", "M"))
    for name, v in (("D", D), ("K", K), ("T", T), ("M", M)):
        _expect(isinstance(v, int) and v >= 0, f"{name} must be a non-negative integer")
    _expect(D >= 1 and T >= 1 and M >= 1, "index must cover at least one region")

    raw_keys = doc.get("keys")
    _expect(isinstance(raw_keys, list) and len(raw_keys) == M, "keys must list M rows")
    keys = np.asarray(raw_keys, dtype=np.int64)
    _expect(keys.shape == (M, T) and (keys >= 0).all(), "keys must be M x T non-negative")

    raw_out = doc.get("outputs")
    _expect(isinstance(raw_out, list) and len(raw_out) == M, "outputs must list M rows")
    outputs = np.asarray(raw_out, dtype=np.float64)
    _expect(outputs.shape == (M, K) and np.isfinite(outputs).all(), "outputs must be M x K finite")

    raw_wit = doc.get("witnesses")
    _expect(isinstance(raw_wit, list) and len(raw_wit) == M, "witnesses must list M rows")
    witnesses = []
    for rows in raw_wit:
        _expect(
            isinstance(rows, list) and rows and all(isinstance(r, int) and r >= 0 for r in rows),
            "each witness list must be non-empty row indices",
        )
        _expect(rows == sorted(rows), "witness rows must be ascending")
        witnesses.append(list(rows))

    groups = doc.get("groups")
    offsets = None
    if task == TASK_CLASSIFICATION:
        _expect(
            isinstance(groups, dict) and list(groups) == ["offsets"],
            "classification index needs group offsets",
        )
        offsets = np.asarray(groups["offsets"], dtype=np.int64)
        _expect(
            offsets.shape == (K + 1,)
            and offsets[0] == 0
            and offsets[-1] == M
            and (np.diff(offsets) >= 0).all(),
            "offsets must be a monotone K+1 partition of M",
        )
        labels = np.argmax(outputs, axis=1)
        for k in range(K):
            _expect(
                (labels[offsets[k] : offsets[k + 1]] == k).all(),
                f"group {k} holds a region with another predicted label",
            )
            group = keys[offsets[k] : offsets[k + 1]]
            for i in range(1, len(group)):
                _expect(
                    tuple(group[i - 1]) < tuple(group[i]),
                    f"group {k} keys are not in ascending order",
                )
    else:
        _expect(groups == {"sorted_by_output": True}, "regression index needs sorted groups")
        _expect(
            (np.diff(outputs[:, 0]) >= 0).all(), "regression outputs must be ascending"
        )

    lower = upper = None
    if "boxes" in doc:
        boxes = doc["boxes"]
        _expect(
            isinstance(boxes, dict) and set(boxes) == {"A", "B"},
            "boxes need exactly A and B",
        )
        for side in ("A", "B"):
            _expect(
                isinstance(boxes[side], list) and len(boxes[side]) == D
                and all(isinstance(col, list) and len(col) == M for col in boxes[side]),
                f"boxes {side} must be D columns of M entries",
            )
        try:
            lower = np.array(
                [[decode_float(v) for v in col] for col in boxes["A"]], dtype=np.float64
            ).T
            upper = np.array(
                [[decode_float(v) for v in col] for col in boxes["B"]], dtype=np.float64
            ).T
        except ValueError as exc:
            raise IndexFormatError(f"bad box entry: {exc}") from exc
        _expect(bool((lower < upper).all()), "every region box must be nonempty")

    if forest is not None:
        _expect(task == forest.task, "index task does not match forest")
        _expect(D == forest.D and T == forest.T and K == forest.K,
                "index dimensions do not match forest")
        for t, tree in enumerate(forest.trees):
            _expect(
                int(keys[:, t].max()) < tree.n_leaves, f"key leaf out of range in tree {t}"
            )
        _expect((lower is not None) == forest.is_axis_aligned(),
                "boxes present iff the forest is axis-aligned")

    return LiveRegionIndex(task, D, K, T, keys, outputs, witnesses, offsets, lower, upper)


def _check_index(forest: Forest, index: LiveRegionIndex) -> None:
    if index.task != forest.task or index.D != forest.D or index.T != forest.T:
        raise IndexFormatError("index does not match this forest")


# ---------------------------------------------------------------------------
# target selection and feature constraints


def select_target_regions(index: LiveRegionIndex, target: TargetSet) -> list[tuple[int, int]]:
    """Half-open [start, end) ranges of index positions whose output lies in
    the target set, ascending and non-adjacent."""
    _check_target_task(index.task, target)
    ranges: list[tuple[int, int]] = []
    if index.task == TASK_CLASSIFICATION:
        for k in target.classes:
            if k >= index.K:
                continue
            start, end = int(index.offsets[k]), int(index.offsets[k + 1])
            if start < end:
                ranges.append((start, end))
        ranges.sort()
    else:
        values = index.outputs[:, 0]
        for lo, hi in target.intervals:
            start = int(np.searchsorted(values, lo, side="left"))
            end = int(np.searchsorted(values, hi, side="right"))
            if start < end:
                ranges.append((start, end))
    merged: list[tuple[int, int]] = []
    for start, end in ranges:
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def apply_feature_constraints(
    lower: np.ndarray,
    upper: np.ndarray,
    fixed: dict[int, float],
    bounds: dict[int, tuple[float, float]],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Shrink region boxes to honor pinned and bounded features.

    Returns (lower', upper', valid). A region stays valid when its shrunk
    box still contains a point of the half-open region; a box pinched to a
    single point is valid unless that point sits on the open upper face.
    """
    D = lower.shape[1]
    lo_c = np.full(D, -np.inf)
    hi_c = np.full(D, np.inf)
    for d, v in fixed.items():
        lo_c[d] = hi_c[d] = v
    for d, (lo, hi) in bounds.items():
        lo_c[d], hi_c[d] = lo, hi
    lower2 = np.maximum(lower, lo_c)
    upper2 = np.minimum(upper, hi_c)
    pinched = lower2 == upper2
    valid = (lower2 <= upper2).all(axis=1) & ~(pinched & (upper2 == upper)).any(axis=1)
    return lower2, upper2, valid


def constraint_halfspaces(
    fixed: dict[int, float], bounds: dict[int, tuple[float, float]], D: int
) -> list[Halfspace]:
    """Feature constraints as halfspaces, for regions without boxes."""
    out: list[Halfspace] = []
    for d in sorted(fixed):
        v = fixed[d]
        e = np.zeros(D)
        e[d] = 1.0
        out.append(Halfspace(e, v))
        out.append(Halfspace(-e, -v))
    for d in sorted(bounds):
        lo, hi = bounds[d]
        e = np.zeros(D)
        e[d] = 1.0
        if np.isfinite(hi):
            out.append(Halfspace(e.copy(), hi))
        if np.isfinite(lo):
            out.append(Halfspace(-e, -lo))
    return out


# ---------------------------------------------------------------------------
# verification and the margin step


def _apply_margin(x: np.ndarray, anchor: np.ndarray, margin: float) -> np.ndarray:
    """Step of euclidean length ``margin`` from x toward the anchor, capped
    at the anchor itself."""
    if margin <= 0.0:
        return x
    direction = anchor - x
    norm = float(np.sqrt(np.sum(direction * direction)))
    if norm <= margin:
        return anchor.copy()
    return x + (margin / norm) * direction


def verify_feasibility(
    forest: Forest,
    x: np.ndarray,
    key: Sequence[int],
    target: TargetSet,
    anchor: np.ndarray,
    margin: float = 0.0,
) -> tuple[bool, np.ndarray]:
    """Route x through the forest and confirm it lands in the claimed region
    with an output in the target set.

    Points produced by projection can sit exactly on an open boundary and
    route to a neighboring region. When that happens the point is nudged
    toward the region's interior anchor, doubling the step from
    max(margin, 1e-9) of the way up to the anchor itself, and re-checked.
    Returns the verdict and the possibly nudged point.
    """
    key = tuple(int(k) for k in key)

    def lands(pt: np.ndarray) -> bool:
        return leaf_tuple(forest, pt) == key and _output_in_target(
            forest.task, target, predict(forest, pt).vector
        )

    if lands(x):
        return True, x
    lam = max(margin, NUDGE_FLOOR)
    while lam < 1.0:
        cand = x + lam * (anchor - x)
        if lands(cand):
            return True, cand
        lam *= 2.0
    cand = np.array(anchor, dtype=np.float64)
    ok = _output_in_target(forest.task, target, predict(forest, cand).vector)
    return ok, cand


# ---------------------------------------------------------------------------
# the scan kernel


def _polytope_anchor(system, D: int) -> np.ndarray:
    """Interior point of a winning halfspace system, used as the nudge and
    margin target. Prefers a point with slack on every constraint so exact
    routing comparisons at the anchor are stable."""
    anchor = inset_point(system, D)
    if anchor is None:
        anchor = feasible_point(system, D, tighten=True)
    if anchor is None:
        anchor = feasible_point(system, D, tighten=False)
    return anchor


def _scan_boxes(
    lower: np.ndarray,
    upper: np.ndarray,
    x: np.ndarray,
    metric: DistanceMetric,
    limit: int | None,
    deadline: float | None,
) -> tuple[int, float, int]:
    """Closest box to x among the rows, chunked so large scans reuse two
    fixed buffers. Returns (row, distance, rows evaluated); ties keep the
    lowest row."""
    n = len(lower) if limit is None else min(limit, len(lower))
    D = lower.shape[1]
    width = min(SCAN_CHUNK, n)
    buf_a = np.empty((width, D))
    buf_b = np.empty((width, D))
    best_i, best = -1, np.inf
    evaluated = 0
    for s in range(0, n, SCAN_CHUNK):
        e = min(s + SCAN_CHUNK, n)
        t = np.subtract(lower[s:e], x, out=buf_a[: e - s])
        u = np.subtract(x, upper[s:e], out=buf_b[: e - s])
        np.maximum(t, u, out=t)
        np.maximum(t, 0.0, out=t)
        if metric.kind == METRIC_L2SQ:
            np.multiply(t, t, out=t)
        if metric.weights is not None:
            np.multiply(t, metric.weights, out=t)
        d = t.sum(axis=1)
        j = int(np.argmin(d))
        if float(d[j]) < best:
            best, best_i = float(d[j]), s + j
        evaluated = e
        if deadline is not None and time.monotonic() >= deadline:
            break
    return best_i, best, evaluated


# ---------------------------------------------------------------------------
# search methods


def find_ce(forest: Forest, index: LiveRegionIndex, query: CEQuery) -> CEResult:
    """Closest counterfactual whose region is live.

    Axis-aligned forests take the vectorized box path; anything else walks
    the candidate regions and projects onto each halfspace system. Ties go
    to the lowest index position. The returned point is verified by routing
    it back through the forest.
    """
    x0 = _validate_query(forest, query)
    _check_index(forest, index)
    ranges = select_target_regions(index, query.target)
    if not ranges:
        raise NoLiveTargetRegionError("no live region's output lies in the target set")
    sel = np.concatenate([np.arange(s, e) for s, e in ranges])
    deadline = (
        time.monotonic() + query.budget_millis / 1000.0
        if query.budget_millis is not None
        else None
    )
    constrained = bool(query.fixed or query.bounds)

    if index.axis_aligned:
        lower, upper = index.lower[sel], index.upper[sel]
        if constrained:
            lower, upper, valid = apply_feature_constraints(
                lower, upper, query.fixed, query.bounds
            )
            if not valid.any():
                raise AllRegionsInfeasibleError(
                    "every target region is empty under the feature constraints"
                )
            lower, upper, sel = lower[valid], upper[valid], sel[valid]
        pos, _, evaluated = _scan_boxes(
            lower, upper, x0, query.metric, query.budget_regions, deadline
        )
        scanned = evaluated
        anytime = evaluated < len(sel)
        g = int(sel[pos])
        box = Box(lower[pos], upper[pos])
        x_star = project_to_box(x0, box)
        anchor = interior_box_point(box.lower, box.upper)
    else:
        cons = constraint_halfspaces(query.fixed, query.bounds, forest.D)
        best = None
        scanned = 0
        anytime = False
        for g in sel:
            if query.budget_regions is not None and scanned >= query.budget_regions:
                anytime = True
                break
            if deadline is not None and time.monotonic() >= deadline:
                anytime = True
                break
            system = region_constraints(forest, index.keys[g]).halfspaces + cons
            if cons and feasible_point(system, forest.D, tighten=False) is None:
                continue
            if query.metric.kind == METRIC_L2SQ:
                res = project_to_polytope_l2(x0, system, query.metric.weights)
                if not res.feasible:
                    continue
                cand_x, cand_d = res.x, res.distance
            else:
                try:
                    cand_x, cand_d = min_l1_to_polytope(x0, system, query.metric.weights)
                except InfeasiblePolytopeError:
                    continue
            scanned += 1
            if best is None or cand_d < best[1]:
                best = (cand_x, cand_d, int(g), system)
        if best is None:
            raise AllRegionsInfeasibleError(
                "every target region is infeasible under the feature constraints"
            )
        x_star, _, g, system = best
        anchor = _polytope_anchor(system, forest.D)

    x_star = _apply_margin(x_star, anchor, query.margin)
    feasible, x_final = verify_feasibility(
        forest, x_star, index.keys[g], query.target, anchor, query.margin
    )
    return CEResult(
        x_final,
        query.metric.distance(x_final, x0),
        tuple(int(k) for k in index.keys[g]),
        int(index.witnesses[g][0]),
        feasible,
        int(scanned),
        bool(anytime),
        METHOD_LIRE,
    )


def dataset_search(forest: Forest, X, query: CEQuery) -> CEResult:
    """Closest qualifying dataset row: target output, constraints already
    satisfied. The baseline every region search must beat or match."""
    x0 = _validate_query(forest, query)
    X = check_dataset(forest, X)
    _check_target_task(forest.task, query.target)
    preds = predict_matrix(forest, X)
    if forest.task == TASK_CLASSIFICATION:
        labels = np.argmax(preds, axis=1)
        mask = np.isin(labels, np.array(query.target.classes, dtype=np.int64))
    else:
        values = preds[:, 0]
        mask = np.zeros(len(X), dtype=bool)
        for lo, hi in query.target.intervals:
            mask |= (values >= lo) & (values <= hi)
    for d, v in query.fixed.items():
        mask &= X[:, d] == v
    for d, (lo, hi) in query.bounds.items():
        mask &= (X[:, d] >= lo) & (X[:, d] <= hi)
    rows = np.flatnonzero(mask)
    if rows.size == 0:
        raise NoQualifyingRowError("no dataset row satisfies the target and constraints")
    dists = query.metric.pairwise(X[rows], x0)
    j = int(np.argmin(dists))
    row = int(rows[j])
    x = X[row].copy()
    return CEResult(
        x,
        query.metric.distance(x, x0),
        leaf_tuple(forest, x),
        row,
        True,
        int(rows.size),
        False,
        METHOD_DATASET,
    )


def exact_search(forest: Forest, region_set: RegionSet, query: CEQuery) -> CEResult:
    """Search every nonempty region, live or not: the exact optimum of the
    relaxation and the lower bound for the live search. Needs a complete
    enumeration and refuses capped region sets."""
    if region_set.capped or region_set.trees_used != forest.T:
        raise CappedRegionSetError("exact search needs an uncapped, complete enumeration")
    x0 = _validate_query(forest, query)
    _check_target_task(forest.task, query.target)
    if forest.task == TASK_CLASSIFICATION:
        labels = np.argmax(region_set.outputs, axis=1)
        mask = np.isin(labels, np.array(query.target.classes, dtype=np.int64))
    else:
        values = region_set.outputs[:, 0]
        mask = np.zeros(region_set.M, dtype=bool)
        for lo, hi in query.target.intervals:
            mask |= (values >= lo) & (values <= hi)
    sel = np.flatnonzero(mask)
    if sel.size == 0:
        raise NoLiveTargetRegionError("no enumerated region's output lies in the target set")
    constrained = bool(query.fixed or query.bounds)

    if region_set.lower is not None:
        lower, upper = region_set.lower[sel], region_set.upper[sel]
        if constrained:
            lower, upper, valid = apply_feature_constraints(
                lower, upper, query.fixed, query.bounds
            )
            if not valid.any():
                raise AllRegionsInfeasibleError(
                    "every target region is empty under the feature constraints"
                )
            lower, upper, sel = lower[valid], upper[valid], sel[valid]
        pos, _, evaluated = _scan_boxes(lower, upper, x0, query.metric, None, None)
        scanned = evaluated
        g = int(sel[pos])
        box = Box(lower[pos], upper[pos])
        x_star = project_to_box(x0, box)
        anchor = interior_box_point(box.lower, box.upper)
    else:
        cons = constraint_halfspaces(query.fixed, query.bounds, forest.D)
        best = None
        scanned = 0
        for g in sel:
            system = region_constraints(forest, region_set.keys[g]).halfspaces + cons
            if cons and feasible_point(system, forest.D, tighten=False) is None:
                continue
            if query.metric.kind == METRIC_L2SQ:
                res = project_to_polytope_l2(x0, system, query.metric.weights)
                if not res.feasible:
                    continue
                cand_x, cand_d = res.x, res.distance
            else:
                try:
                    cand_x, cand_d = min_l1_to_polytope(x0, system, query.metric.weights)
                except InfeasiblePolytopeError:
                    continue
            scanned += 1
            if best is None or cand_d < best[1]:
                best = (cand_x, cand_d, int(g), system)
        if best is None:
            raise AllRegionsInfeasibleError(
                "every target region is infeasible under the feature constraints"
            )
        x_star, _, g, system = best
        anchor = _polytope_anchor(system, forest.D)

    x_star = _apply_margin(x_star, anchor, query.margin)
    feasible, x_final = verify_feasibility(
        forest, x_star, region_set.keys[g], query.target, anchor, query.margin
    )
    return CEResult(
        x_final,
        query.metric.distance(x_final, x0),
        tuple(int(k) for k in region_set.keys[g]),
        -1,
        feasible,
        int(scanned),
        False,
        METHOD_EXACT,
    )
