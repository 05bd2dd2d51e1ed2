"""Region geometry: boxes, halfspaces, metrics, projections.

Axis-aligned forests carve space into boxes that are closed below and open
above, matching the routing rule that sends threshold-equal values right.
Oblique splits produce halfspace systems instead. Solvers operate on the
closure of a region; strict sides are recorded so feasibility checks can
tighten them by a small margin.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ._simplex import INFEASIBLE, OPTIMAL, solve_lp
from .errors import (
    InfeasiblePolytopeError,
    InvalidRegionKeyError,
    NumericalDiagnosticError,
)
from .forest import Forest, leaf_paths

METRIC_L2SQ = "l2sq"
METRIC_L1 = "l1"

EPS_OPEN = 1e-9
DYKSTRA_TOL = 1e-8
DYKSTRA_MAX_CYCLES = 10000
CONSTRAINT_TOL = 1e-6


@dataclass(frozen=True)
class Box:
    """Product of per-feature intervals [lower, upper), entries may be +-inf."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.float64)
        hi = np.asarray(self.upper, dtype=np.float64)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("box bounds must be matching 1-D arrays")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def is_empty(self) -> bool:
        return bool((self.lower >= self.upper).any())


@dataclass(frozen=True)
class Halfspace:
    """Closure constraint normal . x <= offset. ``strict`` records that the
    underlying region uses < rather than <=."""

    normal: np.ndarray
    offset: float
    strict: bool = False

    def violation(self, x: np.ndarray) -> float:
        return float(self.normal @ x - self.offset)


@dataclass(frozen=True)
class DistanceMetric:
    """Squared euclidean ("l2sq") or manhattan ("l1"), optionally with
    positive per-feature weights."""

    kind: str
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in (METRIC_L2SQ, METRIC_L1):
            raise ValueError(f"unknown metric {self.kind!r}")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64)
            if w.ndim != 1 or not np.isfinite(w).all() or (w <= 0).any():
                raise ValueError("metric weights must be finite and positive")
            object.__setattr__(self, "weights", w)

    def check_dim(self, D: int) -> None:
        if self.weights is not None and self.weights.shape != (D,):
            raise ValueError(f"metric weights must have length {D}")

    def distance(self, x, y) -> float:
        over = np.abs(np.subtract(x, y))
        if self.kind == METRIC_L2SQ:
            over = over * over
        if self.weights is not None:
            over = self.weights * over
        return float(np.sum(over))

    def pairwise(self, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Distance from every row of X to y, shape (N,)."""
        over = np.abs(X - y)
        if self.kind == METRIC_L2SQ:
            over = over * over
        if self.weights is not None:
            over = over * self.weights
        return over.sum(axis=1)


def project_to_box(x: np.ndarray, box: Box) -> np.ndarray:
    """Closest point of the box closure, elementwise clip."""
    return np.clip(x, box.lower, box.upper)


def distance_to_box(x: np.ndarray, box: Box, metric: DistanceMetric) -> float:
    """Metric distance from x to the box closure without materializing the
    projection: only the per-feature overshoot contributes."""
    over = np.maximum(np.maximum(box.lower - x, x - box.upper), 0.0)
    if metric.kind == METRIC_L2SQ:
        over = over * over
    if metric.weights is not None:
        over = metric.weights * over
    return float(np.sum(over))


@dataclass(frozen=True)
class RegionGeometry:
    """Closure constraints of one region: always as halfspaces, and also as a
    box when every split along the paths is axis-aligned."""

    halfspaces: list[Halfspace]
    box: Box | None


def _paths_of(tree) -> list:
    cached = getattr(tree, "_paths", None)
    if cached is None:
        cached = leaf_paths(tree)
        tree._paths = cached
    return cached


def region_constraints(forest: Forest, key: Sequence[int]) -> RegionGeometry:
    """Assemble the constraint system of the region keyed by per-tree leaves.

    One halfspace per split on each root-to-leaf path. Right branches hold
    the closed side (>= threshold), left branches the open side, flagged
    strict.
    """
    key = tuple(int(k) for k in key)
    if len(key) != forest.T:
        raise InvalidRegionKeyError(f"key length {len(key)} != {forest.T} trees")
    D = forest.D
    halfspaces: list[Halfspace] = []
    axis_only = True
    lower = np.full(D, -np.inf)
    upper = np.full(D, np.inf)
    for t, tree in enumerate(forest.trees):
        if not 0 <= key[t] < tree.n_leaves:
            raise InvalidRegionKeyError(f"leaf {key[t]} out of range in tree {t}")
        for split, went_right in _paths_of(tree)[key[t]]:
            if split.kind == "axis":
                e = np.zeros(D)
                if went_right:
                    e[split.feature] = -1.0
                    halfspaces.append(Halfspace(e, -split.threshold))
                    lower[split.feature] = max(lower[split.feature], split.threshold)
                else:
                    e[split.feature] = 1.0
                    halfspaces.append(Halfspace(e, split.threshold, strict=True))
                    upper[split.feature] = min(upper[split.feature], split.threshold)
            else:
                axis_only = False
                if went_right:
                    halfspaces.append(Halfspace(-split.weights, -split.bias))
                else:
                    halfspaces.append(Halfspace(split.weights.copy(), split.bias, strict=True))
    box = Box(lower, upper) if axis_only else None
    return RegionGeometry(halfspaces, box)


def _stack_system(halfspaces: Sequence[Halfspace], tighten: bool) -> tuple[np.ndarray, np.ndarray]:
    G = np.stack([h.normal for h in halfspaces])
    off = np.array([h.offset - EPS_OPEN if tighten and h.strict else h.offset for h in halfspaces])
    return G, off


def feasible_point(halfspaces: Sequence[Halfspace], D: int, tighten: bool = True):
    """A point satisfying the system, or None. Strict sides are tightened by
    EPS_OPEN when ``tighten`` so the point stays off open boundaries."""
    if not halfspaces:
        return np.zeros(D)
    G, h = _stack_system(halfspaces, tighten)
    status, v, _ = solve_lp(np.zeros(2 * D), np.hstack([G, -G]), h)
    if status == INFEASIBLE:
        return None
    return v[:D] - v[D:]


def inset_point(halfspaces: Sequence[Halfspace], D: int, inset: float = EPS_OPEN):
    """A point with slack at least ``inset`` (scaled per row norm) on every
    constraint, or None. Unlike feasible_point it keeps off closed boundaries
    too, so exact >= comparisons at the point are stable."""
    if not halfspaces:
        return np.zeros(D)
    G = np.stack([h.normal for h in halfspaces])
    norms = np.linalg.norm(G, axis=1)
    h = np.array([hs.offset for hs in halfspaces]) - inset * norms
    status, v, _ = solve_lp(np.zeros(2 * D), np.hstack([G, -G]), h)
    if status == INFEASIBLE:
        return None
    return v[:D] - v[D:]


class ProjectionResult(NamedTuple):
    x: np.ndarray
    distance: float
    feasible: bool
    converged: bool
    cycles: int


def project_to_polytope_l2(
    source,
    halfspaces: Sequence[Halfspace],
    weights: np.ndarray | None = None,
    tol: float = DYKSTRA_TOL,
    max_cycles: int = DYKSTRA_MAX_CYCLES,
) -> ProjectionResult:
    """Squared-euclidean projection onto an intersection of halfspace
    closures, by Dykstra's cyclic scheme.

    Each cycle re-projects onto every halfspace with correction terms that
    steer the limit to the true projection rather than an arbitrary feasible
    point. Weighted metrics are handled by rescaling coordinates with
    sqrt(weights). The result flags infeasible systems instead of raising:
    ``feasible`` is False when the final point still violates a constraint
    by more than CONSTRAINT_TOL, and ``converged`` is False when the cycle
    displacement never fell below ``tol``.
    """
    source = np.asarray(source, dtype=np.float64)
    D = source.shape[0]
    if not halfspaces:
        return ProjectionResult(source.copy(), 0.0, True, True, 0)

    scale = np.sqrt(weights) if weights is not None else None
    z = source * scale if scale is not None else source.copy()
    G = np.stack([h.normal for h in halfspaces])
    h_off = np.array([h.offset for h in halfspaces], dtype=np.float64)
    if scale is not None:
        G = G / scale
    sq = (G * G).sum(axis=1)
    m = len(halfspaces)
    corr = np.zeros((m, D))
    corr_before = np.empty_like(corr)

    converged = False
    cycles = 0
    for cycles in range(1, max_cycles + 1):
        z_before = z.copy()
        corr_before[:] = corr
        for i in range(m):
            y = z + corr[i]
            v = float(G[i] @ y - h_off[i])
            if v > 0.0:
                z = y - (v / sq[i]) * G[i]
            else:
                z = y
            corr[i] = y - z
        if not np.isfinite(z).all():
            raise NumericalDiagnosticError("projection iterate became non-finite")
        # the iterate alone can sit still for a whole cycle while the
        # corrections keep rotating among constraints, so both must settle
        moved = float(np.abs(z - z_before).max())
        corr_moved = float(np.abs(corr - corr_before).max())
        if max(moved, corr_moved) < tol:
            converged = True
            break

    # correction-free clean-up pass: plain cyclic projection restores
    # feasibility when Dykstra stopped slightly outside
    feasible = True
    for _ in range(2000):
        worst = float((G @ z - h_off).max())
        if worst <= CONSTRAINT_TOL:
            break
        for i in range(m):
            v = float(G[i] @ z - h_off[i])
            if v > 0.0:
                z = z - (v / sq[i]) * G[i]
    else:
        feasible = False

    x = z / scale if scale is not None else z
    metric = DistanceMetric(METRIC_L2SQ, weights)
    return ProjectionResult(x, metric.distance(x, source), feasible, converged, cycles)


def min_l1_to_polytope(
    source,
    halfspaces: Sequence[Halfspace],
    weights: np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    """Manhattan-closest point of a halfspace intersection, by LP.

    Displacement u = x - source splits into positives u+ and u-, giving the
    program min w.(u+ + u-) s.t. G(u+ - u-) <= h - G source. Raises
    InfeasiblePolytopeError when the system is empty.
    """
    source = np.asarray(source, dtype=np.float64)
    D = source.shape[0]
    if not halfspaces:
        return source.copy(), 0.0
    G, h = _stack_system(halfspaces, tighten=False)
    w = np.ones(D) if weights is None else np.asarray(weights, dtype=np.float64)
    status, v, _ = solve_lp(np.concatenate([w, w]), np.hstack([G, -G]), h - G @ source)
    if status == INFEASIBLE:
        raise InfeasiblePolytopeError("halfspace system has no feasible point")
    if status != OPTIMAL:
        raise NumericalDiagnosticError(f"l1 projection LP ended {status}")
    u = v[:D] - v[D:]
    x = source + u
    metric = DistanceMetric(METRIC_L1, weights)
    return x, metric.distance(x, source)
