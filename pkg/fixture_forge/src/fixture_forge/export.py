"""Export scikit-learn tree ensembles to the JSON forest format.

The format routes right when ``x[feature] >= threshold``; scikit-learn
routes left when ``x[feature] <= threshold`` after casting the query to
float32. Each exported threshold is the smallest double the trainer sends
right, so routing agrees with the trainer for every double-precision
input, split boundaries included.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
from sklearn.ensemble import (
    ExtraTreesClassifier,
    ExtraTreesRegressor,
    RandomForestClassifier,
    RandomForestRegressor,
)
from sklearn.tree import DecisionTreeClassifier, DecisionTreeRegressor

FORMAT_VERSION = 1

_CLASSIFIERS = (DecisionTreeClassifier, RandomForestClassifier, ExtraTreesClassifier)
_REGRESSORS = (DecisionTreeRegressor, RandomForestRegressor, ExtraTreesRegressor)


class UnsupportedModelError(ValueError):
    """The model cannot be expressed in the forest format.

    ``problems`` lists one human-readable entry per offending node or
    model-level mismatch.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def _tree_problems(tree, ti: int, D: int) -> list[str]:
    n = tree.node_count
    left, right = tree.children_left, tree.children_right
    feature, threshold = tree.feature, tree.threshold
    out = []
    for i in range(n):
        if left[i] == -1 and right[i] == -1:
            continue
        if left[i] == -1 or right[i] == -1:
            out.append(f"tree {ti} node {i}: one-sided split")
            continue
        if feature[i] < 0 or feature[i] >= D:
            out.append(f"tree {ti} node {i}: feature index {feature[i]} out of range")
        if not math.isfinite(threshold[i]):
            out.append(f"tree {ti} node {i}: non-finite threshold {threshold[i]}")
    return out


def _boundary(threshold: float) -> float:
    """Smallest double the trainer routes right at this split.

    The trainer compares float32(x) <= threshold, so its true boundary is
    the rounding midpoint between the float32 neighbours of the threshold,
    nudged by the tie-to-even direction of the midpoint itself.
    """
    thr = float(threshold)
    f = np.float32(thr)
    hi = np.nextafter(f, np.float32(np.inf)) if float(f) <= thr else f
    lo = np.nextafter(hi, np.float32(-np.inf))
    if not (np.isfinite(lo) and np.isfinite(hi)):
        return float(np.nextafter(thr, np.inf))
    mid = (float(lo) + float(hi)) / 2.0
    if float(np.float32(mid)) > thr:
        return mid
    return float(np.nextafter(mid, np.inf))


def _tree_doc(tree, task: str) -> dict:
    """One sklearn tree_ object to a {nodes, leaves} document."""
    left, right = tree.children_left, tree.children_right
    nodes: list[dict] = []
    leaves: list[dict] = []

    def convert(i: int) -> int:
        if left[i] == -1:
            row = tree.value[i][0]
            if task == "classification":
                vec = row / row.sum()
            else:
                vec = row[:1]
            leaves.append({"value": [float(v) for v in vec]})
            return -len(leaves)
        my = len(nodes)
        nodes.append(
            {
                "kind": "axis",
                "feature": int(tree.feature[i]),
                "threshold": _boundary(tree.threshold[i]),
                "left": 0,
                "right": 0,
            }
        )
        nodes[my]["left"] = convert(left[i])
        nodes[my]["right"] = convert(right[i])
        return my

    convert(0)
    return {"nodes": nodes, "leaves": leaves}


def export_forest(model, out_path=None) -> dict:
    """Forest-format document for a fitted sklearn tree model or ensemble.

    Supported: DecisionTree / RandomForest / ExtraTrees, classifier or
    regressor, single output. Anything else raises UnsupportedModelError
    listing every problem found. When out_path is given the document is
    also written there as JSON.
    """
    if isinstance(model, _CLASSIFIERS):
        task = "classification"
    elif isinstance(model, _REGRESSORS):
        task = "regression"
    else:
        raise UnsupportedModelError(
            [f"model type {type(model).__name__} has no forest-format equivalent"]
        )

    problems = []
    if getattr(model, "n_outputs_", 1) != 1:
        problems.append(f"multi-output model (n_outputs_={model.n_outputs_})")
    D = int(model.n_features_in_)
    estimators = model.estimators_ if hasattr(model, "estimators_") else [model]
    for ti, est in enumerate(estimators):
        problems.extend(_tree_problems(est.tree_, ti, D))
    if problems:
        raise UnsupportedModelError(problems)

    K = len(model.classes_) if task == "classification" else 1
    doc = {
        "version": FORMAT_VERSION,
        "task": task,
        "D": D,
        "K": K,
        "trees": [_tree_doc(est.tree_, task) for est in estimators],
    }
    if task == "classification":
        doc["class_values"] = [int(c) for c in model.classes_]
    if out_path is not None:
        Path(out_path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")
    return doc
