"""Region enumeration over the forest partition.

A region is the intersection of one leaf cell per tree, keyed by the tuple
of leaf indices. Enumeration builds the nonempty regions tree by tree,
discarding empty intersections as soon as they appear; live enumeration
instead routes a dataset and keeps only regions holding at least one row.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CappedRegionSetError, DimensionMismatchError
from .forest import (
    Forest,
    Node,
    Tree,
    check_dataset,
    leaf_paths,
    leaf_tuple_matrix,
)
from .geometry import Halfspace, feasible_point, inset_point, region_constraints

DEFAULT_CAP = 1_000_000

PROVENANCE_NONEMPTY = "nonempty"
PROVENANCE_LIVE = "live"


@dataclass
class RegionSet:
    """Regions in lexicographic key order with their aggregated outputs.

    ``lower``/``upper`` hold per-region boxes for axis-aligned forests.
    ``witnesses`` holds ascending dataset row indices for live sets.
    ``witness_points`` holds one interior point per region for oblique
    nonempty sets, where no box is available. A capped set covers only the
    first ``trees_used`` trees and its keys are that short.
    """

    keys: np.ndarray
    outputs: np.ndarray
    provenance: str
    trees_used: int
    capped: bool = False
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    witnesses: list[list[int]] | None = None
    witness_points: np.ndarray | None = None

    @property
    def M(self) -> int:
        return len(self.keys)


def box_intersection(lo1, hi1, lo2, hi2):
    """Intersection of two boxes closed below and open above, or None when
    empty. Emptiness is strict: touching bounds do not overlap."""
    lo = np.maximum(lo1, lo2)
    hi = np.minimum(hi1, hi2)
    if (lo < hi).all():
        return lo, hi
    return None


def polytope_feasible(halfspaces: Sequence[Halfspace], D: int) -> bool:
    """Whether the system admits a point, with strict sides tightened by a
    small margin so open boundaries do not count."""
    return feasible_point(halfspaces, D, tighten=True) is not None


def interior_box_point(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """A deterministic point inside [lo, hi); bounds may be infinite and a
    dimension may be pinned to a single value."""
    out = np.empty_like(lo)
    for d in range(len(lo)):
        a, b = lo[d], hi[d]
        if a == b:
            out[d] = a
        elif math.isinf(a) and math.isinf(b):
            out[d] = 0.0
        elif math.isinf(a):
            out[d] = b - 1.0
        elif math.isinf(b):
            out[d] = a + 1.0
        else:
            out[d] = 0.5 * (a + b)
    return out


def _tree_leaf_boxes(tree: Tree, D: int) -> tuple[np.ndarray, np.ndarray]:
    """Fold each root-to-leaf path into a box, shapes (L, D) twice.

    Only valid for trees whose splits are all axis-aligned.
    """
    lo = np.full((tree.n_leaves, D), -np.inf)
    hi = np.full((tree.n_leaves, D), np.inf)
    for leaf, path in enumerate(leaf_paths(tree)):
        for split, went_right in path:
            if went_right:
                lo[leaf, split.feature] = max(lo[leaf, split.feature], split.threshold)
            else:
                hi[leaf, split.feature] = min(hi[leaf, split.feature], split.threshold)
    return lo, hi


def _aggregate_outputs(forest: Forest, keys: np.ndarray, trees_used: int) -> np.ndarray:
    """Weighted-mean output vector per key row, using the first trees only."""
    w = forest.weights[:trees_used]
    out = np.zeros((len(keys), forest.K))
    for t in range(trees_used):
        out += w[t] * forest.trees[t].leaves[keys[:, t]]
    out /= w.sum()
    return out


def _enumerate_axis_steps(forest: Forest, cap: int):
    """Yield (trees_used, keys, lo, hi, capped) after each tree is folded in.

    Stops after the first step whose expansion would exceed the cap; that
    step reports the last complete state with the capped flag raised.
    """
    D = forest.D
    lo0, hi0 = _tree_leaf_boxes(forest.trees[0], D)
    alive = np.flatnonzero((lo0 < hi0).all(axis=1))
    if alive.size > cap:
        yield 0, np.empty((0, 0), dtype=np.int64), None, None, True
        return
    keys = alive[:, None].astype(np.int64)
    lo, hi = lo0[alive], hi0[alive]
    yield 1, keys, lo, hi, False
    for t in range(1, forest.T):
        lo_t, hi_t = _tree_leaf_boxes(forest.trees[t], D)
        masks = []
        total = 0
        for j in range(len(lo_t)):
            mask = ((np.maximum(lo, lo_t[j]) < np.minimum(hi, hi_t[j]))).all(axis=1)
            masks.append(mask)
            total += int(mask.sum())
        if total > cap:
            yield t, keys, lo, hi, True
            return
        parts_keys, parts_lo, parts_hi, parents = [], [], [], []
        for j, mask in enumerate(masks):
            if not mask.any():
                continue
            idx = np.flatnonzero(mask)
            parts_keys.append(
                np.hstack([keys[idx], np.full((idx.size, 1), j, dtype=np.int64)])
            )
            parts_lo.append(np.maximum(lo[idx], lo_t[j]))
            parts_hi.append(np.minimum(hi[idx], hi_t[j]))
            parents.append(idx)
        keys = np.vstack(parts_keys)
        lo = np.vstack(parts_lo)
        hi = np.vstack(parts_hi)
        # reorder leaf-major blocks to parent-major, keeping leaves ascending,
        # which restores lexicographic key order
        order = np.argsort(np.concatenate(parents), kind="stable")
        keys, lo, hi = keys[order], lo[order], hi[order]
        yield t + 1, keys, lo, hi, False


def _stable_witness(halfspaces, D):
    """Existence test plus a witness that routes stably: prefer a point with
    real slack on every side, fall back to the bare feasibility point."""
    w = feasible_point(halfspaces, D)
    if w is None:
        return None
    deep = inset_point(halfspaces, D)
    return w if deep is None else deep


def _enumerate_oblique_steps(forest: Forest, cap: int):
    """General-forest variant of the stepwise enumeration, carrying halfspace
    lists and a feasible witness point per region."""
    D = forest.D
    paths = [
        [
            [_path_halfspace(split, went_right, D) for split, went_right in path]
            for path in leaf_paths(tree)
        ]
        for tree in forest.trees
    ]
    regions = []
    for j, hs in enumerate(paths[0]):
        w = _stable_witness(hs, D)
        if w is not None:
            regions.append(((j,), hs, w))
    if len(regions) > cap:
        yield 0, [], True
        return
    yield 1, regions, False
    for t in range(1, forest.T):
        new = []
        for key, hs, _ in regions:
            for j, leaf_hs in enumerate(paths[t]):
                cand = hs + leaf_hs
                w = _stable_witness(cand, D)
                if w is not None:
                    new.append((key + (j,), cand, w))
            if len(new) > cap:
                yield t, regions, True
                return
        regions = new
        yield t + 1, regions, False


def _path_halfspace(split, went_right: bool, D: int) -> Halfspace:
    if split.kind == "axis":
        e = np.zeros(D)
        e[split.feature] = -1.0 if went_right else 1.0
        return Halfspace(e, -split.threshold if went_right else split.threshold,
                         strict=not went_right)
    if went_right:
        return Halfspace(-split.weights, -split.bias)
    return Halfspace(split.weights.copy(), split.bias, strict=True)


def enumerate_nonempty_regions(forest: Forest, cap: int = DEFAULT_CAP) -> RegionSet:
    """All regions of the forest partition with nonempty interior.

    Works tree by tree so empty intersections never multiply. If an
    intermediate step would exceed ``cap`` regions the enumeration stops and
    returns the last complete step with ``capped`` set; its keys then cover
    only ``trees_used`` trees.
    """
    if cap < 1:
        raise ValueError("cap must be positive")
    if forest.is_axis_aligned():
        for trees_used, keys, lo, hi, capped in _enumerate_axis_steps(forest, cap):
            pass
        outputs = (
            _aggregate_outputs(forest, keys, trees_used)
            if trees_used
            else np.zeros((0, forest.K))
        )
        return RegionSet(
            keys, outputs, PROVENANCE_NONEMPTY, trees_used, capped, lower=lo, upper=hi
        )
    for trees_used, regions, capped in _enumerate_oblique_steps(forest, cap):
        pass
    if regions:
        keys = np.array([key for key, _, _ in regions], dtype=np.int64)
        points = np.stack([w for _, _, w in regions])
        outputs = _aggregate_outputs(forest, keys, trees_used)
    else:
        keys = np.empty((0, trees_used), dtype=np.int64)
        points = np.zeros((0, forest.D))
        outputs = np.zeros((0, forest.K))
    return RegionSet(
        keys, outputs, PROVENANCE_NONEMPTY, trees_used, capped, witness_points=points
    )


def enumerate_live_regions(forest: Forest, X) -> RegionSet:
    """Regions that contain at least one dataset row.

    Routes every row through every tree and deduplicates the key tuples, so
    the cost scales with the dataset, not with the partition. Witness lists
    hold the ascending row indices landing in each region.
    """
    X = check_dataset(forest, X)
    mat = leaf_tuple_matrix(forest, X)
    keys, inverse = np.unique(mat, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(inverse, kind="stable")
    counts = np.bincount(inverse, minlength=len(keys))
    witnesses = [rows.tolist() for rows in np.split(order, np.cumsum(counts)[:-1])]
    outputs = _aggregate_outputs(forest, keys, forest.T)
    lower = upper = None
    if forest.is_axis_aligned():
        lower = np.full((len(keys), forest.D), -np.inf)
        upper = np.full((len(keys), forest.D), np.inf)
        for t, tree in enumerate(forest.trees):
            lo_t, hi_t = _tree_leaf_boxes(tree, forest.D)
            np.maximum(lower, lo_t[keys[:, t]], out=lower)
            np.minimum(upper, hi_t[keys[:, t]], out=upper)
    return RegionSet(
        keys,
        outputs,
        PROVENANCE_LIVE,
        forest.T,
        capped=False,
        lower=lower,
        upper=upper,
        witnesses=witnesses,
    )


def region_witness_point(forest: Forest, region_set: RegionSet, i: int) -> np.ndarray:
    """Deterministic interior point of region i, independent of any dataset."""
    if region_set.lower is not None:
        return interior_box_point(region_set.lower[i], region_set.upper[i])
    if region_set.witness_points is not None:
        return region_set.witness_points[i]
    if region_set.capped:
        raise CappedRegionSetError("capped region sets carry no full-length keys")
    geo = region_constraints(forest, region_set.keys[i])
    point = _stable_witness(geo.halfspaces, forest.D)
    if point is None:
        point = feasible_point(geo.halfspaces, forest.D, tighten=False)
    return point


def truncate_forest(forest: Forest, depth: int) -> Forest:
    """Copy of the forest with every tree cut at the given depth. A node at
    the cut becomes a leaf carrying the plain mean of its subtree's leaves."""
    if depth < 0:
        raise ValueError("depth must not be negative")
    trees = []
    for tree in forest.trees:
        if tree.depth <= depth:
            trees.append(tree)
            continue
        nodes: list[Node] = []
        leaves: list[np.ndarray] = []

        def subtree_mean(ref: int) -> np.ndarray:
            if ref < 0:
                return tree.leaves[-ref - 1]
            node = tree.nodes[ref]
            stack, acc, n = [node.left, node.right], 0.0, 0
            while stack:
                r = stack.pop()
                if r < 0:
                    acc = acc + tree.leaves[-r - 1]
                    n += 1
                else:
                    stack.append(tree.nodes[r].left)
                    stack.append(tree.nodes[r].right)
            return acc / n

        def cut(ref: int, d: int) -> int:
            if ref < 0:
                leaves.append(tree.leaves[-ref - 1])
                return -len(leaves)
            if d == depth:
                leaves.append(subtree_mean(ref))
                return -len(leaves)
            node = tree.nodes[ref]
            slot = len(nodes)
            nodes.append(None)
            left = cut(node.left, d + 1)
            right = cut(node.right, d + 1)
            nodes[slot] = Node(node.split, left, right)
            return slot

        cut(tree.root_ref(), 0)
        trees.append(Tree(nodes, np.array(leaves)))
    return Forest(trees, forest.weights, forest.task, forest.D, forest.K, forest.feature_names)


@dataclass(frozen=True)
class GrowthStep:
    step: int
    upper_bound: int
    nonempty: int | None
    live: int | None
    capped: bool


@dataclass(frozen=True)
class GrowthCurve:
    mode: str
    cap: int
    steps: list[GrowthStep]

    def to_doc(self) -> dict:
        return {
            "mode": self.mode,
            "cap": self.cap,
            "steps": [
                {
                    "step": s.step,
                    "upper_bound": s.upper_bound,
                    "nonempty": s.nonempty,
                    "live": s.live,
                    "capped": s.capped,
                }
                for s in self.steps
            ],
        }


MODE_BY_TREES = "by-trees"
MODE_BY_DEPTH = "by-depth"


def region_growth_curve(
    forest: Forest, X=None, mode: str = MODE_BY_TREES, cap: int = DEFAULT_CAP
) -> GrowthCurve:
    """How the partition grows against its combinatorial bound.

    ``by-trees`` folds trees in one at a time; ``by-depth`` truncates every
    tree to each depth. Counts beyond the cap are reported as None with the
    capped flag, never extrapolated. Live counts need a dataset and are None
    without one.
    """
    live_mat = None
    if X is not None:
        live_mat = leaf_tuple_matrix(forest, check_dataset(forest, X))
    steps = []
    if mode == MODE_BY_TREES:
        stepper = (
            _enumerate_axis_steps(forest, cap)
            if forest.is_axis_aligned()
            else _enumerate_oblique_steps(forest, cap)
        )
        counts: dict[int, int | None] = {}
        last_capped_from = None
        for item in stepper:
            trees_used, capped = item[0], item[-1]
            if capped:
                last_capped_from = trees_used + 1
                break
            counts[trees_used] = len(item[1])
        bound = 1
        for t in range(forest.T):
            bound *= forest.trees[t].n_leaves
            capped = last_capped_from is not None and t + 1 >= last_capped_from
            live = (
                len(np.unique(live_mat[:, : t + 1], axis=0)) if live_mat is not None else None
            )
            steps.append(GrowthStep(t + 1, bound, counts.get(t + 1), live, capped))
    elif mode == MODE_BY_DEPTH:
        max_depth = max(tree.depth for tree in forest.trees)
        for d in range(1, max_depth + 1):
            cut = truncate_forest(forest, d)
            rs = enumerate_nonempty_regions(cut, cap)
            bound = 1
            for tree in cut.trees:
                bound *= tree.n_leaves
            live = None
            if X is not None:
                live = len(np.unique(leaf_tuple_matrix(cut, X), axis=0))
            steps.append(
                GrowthStep(d, bound, None if rs.capped else rs.M, live, rs.capped)
            )
    else:
        raise ValueError(f"unknown growth mode {mode!r}")
    return GrowthCurve(mode, cap, steps)
