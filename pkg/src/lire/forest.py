"""Decision forest model: document parsing, routing, and prediction.

A forest is an additive ensemble of binary trees over a fixed feature space.
Split tests send an instance right exactly when the test value is greater
than or equal to the threshold, so the right branch owns the closed side of
every boundary.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatchError, ForestFormatError

FORMAT_VERSION = 1
PROB_TOL = 1e-6

TASK_CLASSIFICATION = "classification"
TASK_REGRESSION = "regression"


@dataclass(frozen=True)
class Split:
    """One binary test. Axis splits test x[feature] >= threshold, oblique
    splits test weights . x >= bias."""

    kind: str
    feature: int = -1
    threshold: float = 0.0
    weights: np.ndarray | None = None
    bias: float = 0.0

    def goes_right(self, x: np.ndarray) -> bool:
        if self.kind == "axis":
            return bool(x[self.feature] >= self.threshold)
        return bool(float(self.weights @ x) >= self.bias)


@dataclass(frozen=True)
class Node:
    """Internal node. Child references >= 0 name nodes, negative references
    encode leaves as -(leaf_index + 1)."""

    split: Split
    left: int
    right: int


class PathStep(NamedTuple):
    split: Split
    went_right: bool


@dataclass
class Tree:
    """One tree: a node array rooted at index 0 and a dense leaf table.

    ``leaves`` has shape (L, K); ``leaf_depth[i]`` counts the splits on the
    unique root-to-leaf path. A tree with no nodes is a single leaf.
    """

    nodes: list[Node]
    leaves: np.ndarray
    leaf_depth: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.leaf_depth is None:
            self.leaf_depth = _walk_depths(self.nodes, len(self.leaves))

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)

    @property
    def depth(self) -> int:
        return int(self.leaf_depth.max())

    def root_ref(self) -> int:
        return 0 if self.nodes else -1


@dataclass
class Forest:
    trees: list[Tree]
    weights: np.ndarray
    task: str
    D: int
    K: int
    feature_names: list[str] | None = None

    @property
    def T(self) -> int:
        return len(self.trees)

    def is_axis_aligned(self) -> bool:
        return all(
            node.split.kind == "axis" for tree in self.trees for node in tree.nodes
        )


class Prediction(NamedTuple):
    vector: np.ndarray
    label: int | None
    value: float | None


class ForestStats(NamedTuple):
    n_trees: int
    mean_depth: float
    mean_leaves: float


def _walk_depths(nodes: list[Node], n_leaves: int) -> np.ndarray:
    """Check reachability invariants and return per-leaf depths.

    Every node and every leaf must be reached exactly once from the root,
    which forbids cycles, sharing, and dangling entries.
    """
    depths = np.full(n_leaves, -1, dtype=np.int64)
    if not nodes:
        if n_leaves != 1:
            raise ForestFormatError("a tree without nodes must have exactly one leaf")
        depths[0] = 0
        return depths
    seen = np.zeros(len(nodes), dtype=bool)
    stack = [(0, 0)]
    while stack:
        ref, depth = stack.pop()
        if ref < 0:
            leaf = -ref - 1
            if leaf >= n_leaves:
                raise ForestFormatError(f"leaf reference {leaf} out of range")
            if depths[leaf] != -1:
                raise ForestFormatError(f"leaf {leaf} is referenced more than once")
            depths[leaf] = depth
            continue
        if ref >= len(nodes):
            raise ForestFormatError(f"node reference {ref} out of range")
        if seen[ref]:
            raise ForestFormatError(f"node {ref} is visited more than once")
        seen[ref] = True
        node = nodes[ref]
        stack.append((node.right, depth + 1))
        stack.append((node.left, depth + 1))
    if not seen.all():
        raise ForestFormatError("unreachable node in tree")
    if (depths == -1).any():
        raise ForestFormatError("unreachable leaf in tree")
    return depths


def _parse_split(raw: dict, D: int, where: str) -> Split:
    kind = raw.get("kind")
    if kind == "axis":
        feature = raw.get("feature")
        threshold = raw.get("threshold")
        if not isinstance(feature, int) or not 0 <= feature < D:
            raise ForestFormatError(f"{where}: feature index out of range")
        if not isinstance(threshold, (int, float)) or not math.isfinite(threshold):
            raise ForestFormatError(f"{where}: threshold must be finite")
        return Split("axis", feature=feature, threshold=float(threshold))
    if kind == "oblique":
        weights = raw.get("weights")
        bias = raw.get("bias")
        if not isinstance(weights, list) or len(weights) != D:
            raise ForestFormatError(f"{where}: oblique weights must have length {D}")
        w = np.asarray(weights, dtype=np.float64)
        if not np.isfinite(w).all() or not np.any(w != 0.0):
            raise ForestFormatError(f"{where}: oblique weights must be finite and not all zero")
        if not isinstance(bias, (int, float)) or not math.isfinite(bias):
            raise ForestFormatError(f"{where}: bias must be finite")
        w.setflags(write=False)
        return Split("oblique", weights=w, bias=float(bias))
    raise ForestFormatError(f"{where}: unknown split kind {kind!r}")


def _parse_tree(raw: dict, D: int, K: int, task: str, t: int) -> Tree:
    if not isinstance(raw, dict):
        raise ForestFormatError(f"tree {t} must be an object")
    raw_nodes = raw.get("nodes", [])
    raw_leaves = raw.get("leaves")
    if not isinstance(raw_nodes, list) or not isinstance(raw_leaves, list) or not raw_leaves:
        raise ForestFormatError(f"tree {t}: nodes must be a list and leaves a non-empty list")

    n_nodes, n_leaves = len(raw_nodes), len(raw_leaves)
    nodes = []
    for i, rn in enumerate(raw_nodes):
        where = f"tree {t} node {i}"
        if not isinstance(rn, dict):
            raise ForestFormatError(f"{where} must be an object")
        split = _parse_split(rn, D, where)
        refs = []
        for side in ("left", "right"):
            ref = rn.get(side)
            if not isinstance(ref, int):
                raise ForestFormatError(f"{where}: {side} must be an integer reference")
            if ref >= n_nodes or -ref - 1 >= n_leaves:
                raise ForestFormatError(f"{where}: {side} reference {ref} out of range")
            refs.append(ref)
        nodes.append(Node(split, refs[0], refs[1]))

    leaves = np.empty((n_leaves, K), dtype=np.float64)
    for i, rl in enumerate(raw_leaves):
        value = rl.get("value") if isinstance(rl, dict) else None
        if not isinstance(value, list) or len(value) != K:
            raise ForestFormatError(f"tree {t} leaf {i}: value must be a list of length {K}")
        leaves[i] = value
    if not np.isfinite(leaves).all():
        raise ForestFormatError(f"tree {t}: leaf values must be finite")
    if task == TASK_CLASSIFICATION:
        if (leaves < 0).any() or (np.abs(leaves.sum(axis=1) - 1.0) > PROB_TOL).any():
            raise ForestFormatError(
                f"tree {t}: classification leaves must be distributions summing to 1"
            )
    leaves.setflags(write=False)
    return Tree(nodes, leaves)


def forest_from_dict(doc: dict) -> Forest:
    """Build and validate a Forest from an already-decoded document."""
    if not isinstance(doc, dict):
        raise ForestFormatError("forest document must be an object")
    if doc.get("version") != FORMAT_VERSION:
        raise ForestFormatError(f"unsupported format version {doc.get('version')!r}")
    task = doc.get("task")
    if task not in (TASK_CLASSIFICATION, TASK_REGRESSION):
        raise ForestFormatError(f"unknown task {task!r}")
    D = doc.get("D")
    K = doc.get("K")
    if not isinstance(D, int) or D < 1:
        raise ForestFormatError("D must be a positive integer")
    if not isinstance(K, int):
        raise ForestFormatError("K must be an integer")
    if task == TASK_CLASSIFICATION and K < 2:
        raise ForestFormatError("classification forests need K >= 2")
    if task == TASK_REGRESSION and K != 1:
        raise ForestFormatError("regression forests need K == 1")

    raw_trees = doc.get("trees")
    if not isinstance(raw_trees, list) or not raw_trees:
        raise ForestFormatError("trees must be a non-empty list")
    trees = [_parse_tree(rt, D, K, task, t) for t, rt in enumerate(raw_trees)]

    raw_weights = doc.get("tree_weights")
    if raw_weights is None:
        weights = np.ones(len(trees), dtype=np.float64)
    else:
        if not isinstance(raw_weights, list) or len(raw_weights) != len(trees):
            raise ForestFormatError("tree_weights must match the number of trees")
        weights = np.asarray(raw_weights, dtype=np.float64)
        if not np.isfinite(weights).all() or (weights <= 0).any():
            raise ForestFormatError("tree_weights must be finite and positive")
    weights.setflags(write=False)

    names = doc.get("feature_names")
    if names is not None:
        if (
            not isinstance(names, list)
            or len(names) != D
            or not all(isinstance(n, str) for n in names)
        ):
            raise ForestFormatError("feature_names must be a list of D strings")

    return Forest(trees, weights, task, D, K, names)


def parse_forest(text: str) -> Forest:
    """Parse forest-format JSON text into a validated Forest."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ForestFormatError(f"invalid JSON: {exc}") from exc
    return forest_from_dict(doc)


def load_forest(path) -> Forest:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_forest(fh.read())


def check_instance(forest: Forest, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (forest.D,):
        raise DimensionMismatchError(f"instance has shape {x.shape}, expected ({forest.D},)")
    return x


def check_dataset(forest: Forest, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != forest.D:
        raise DimensionMismatchError(f"dataset has shape {X.shape}, expected (N, {forest.D})")
    if X.shape[0] < 1:
        raise DimensionMismatchError("dataset must contain at least one row")
    return X


def route_instance(tree: Tree, x: np.ndarray) -> tuple[int, list[PathStep]]:
    """Follow one instance from the root down; return (leaf index, path)."""
    path = []
    ref = tree.root_ref()
    while ref >= 0:
        node = tree.nodes[ref]
        right = node.split.goes_right(x)
        path.append(PathStep(node.split, right))
        ref = node.right if right else node.left
    return -ref - 1, path


def leaf_tuple(forest: Forest, x) -> tuple[int, ...]:
    """Region key of x: the tuple of leaf indices across trees."""
    x = check_instance(forest, x)
    return tuple(route_instance(tree, x)[0] for tree in forest.trees)


def aggregate_leaf_vectors(forest: Forest, vectors: np.ndarray) -> np.ndarray:
    """Weighted mean of per-tree leaf vectors, shape (T, K) -> (K,)."""
    return forest.weights @ vectors / forest.weights.sum()


def predict(forest: Forest, x) -> Prediction:
    x = check_instance(forest, x)
    picked = np.stack(
        [tree.leaves[route_instance(tree, x)[0]] for tree in forest.trees]
    )
    vec = aggregate_leaf_vectors(forest, picked)
    if forest.task == TASK_CLASSIFICATION:
        return Prediction(vec, int(np.argmax(vec)), None)
    return Prediction(vec, None, float(vec[0]))


def forest_stats(forest: Forest) -> ForestStats:
    """Tree count, mean leaf depth, and mean leaf count per tree."""
    depths = np.concatenate([tree.leaf_depth for tree in forest.trees])
    leaves = np.array([tree.n_leaves for tree in forest.trees], dtype=np.float64)
    return ForestStats(forest.T, float(depths.mean()), float(leaves.mean()))


def route_matrix(tree: Tree, X: np.ndarray) -> np.ndarray:
    """Leaf index per row of X, shape (N,). Vectorized over rows."""
    out = np.empty(len(X), dtype=np.int64)
    stack = [(tree.root_ref(), np.arange(len(X)))]
    while stack:
        ref, idx = stack.pop()
        if ref < 0:
            out[idx] = -ref - 1
            continue
        node = tree.nodes[ref]
        split = node.split
        if split.kind == "axis":
            right = X[idx, split.feature] >= split.threshold
        else:
            right = X[idx] @ split.weights >= split.bias
        if right.any():
            stack.append((node.right, idx[right]))
        if not right.all():
            stack.append((node.left, idx[~right]))
    return out


def leaf_tuple_matrix(forest: Forest, X) -> np.ndarray:
    """Region keys for every row, shape (N, T)."""
    X = check_dataset(forest, X)
    return np.stack([route_matrix(tree, X) for tree in forest.trees], axis=1)


def predict_matrix(forest: Forest, X) -> np.ndarray:
    """Aggregated output vectors for every row, shape (N, K)."""
    X = check_dataset(forest, X)
    acc = np.zeros((len(X), forest.K), dtype=np.float64)
    for tree, w in zip(forest.trees, forest.weights):
        acc += w * tree.leaves[route_matrix(tree, X)]
    acc /= forest.weights.sum()
    return acc


def leaf_paths(tree: Tree) -> list[list[PathStep]]:
    """Root-to-leaf path for every leaf, indexed by leaf."""
    paths: list[list[PathStep]] = [None] * tree.n_leaves
    stack: list[tuple[int, list[PathStep]]] = [(tree.root_ref(), [])]
    while stack:
        ref, path = stack.pop()
        if ref < 0:
            paths[-ref - 1] = path
            continue
        node = tree.nodes[ref]
        stack.append((node.right, path + [PathStep(node.split, True)]))
        stack.append((node.left, path + [PathStep(node.split, False)]))
    return paths
