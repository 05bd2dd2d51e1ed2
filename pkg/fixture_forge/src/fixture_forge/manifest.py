"""Route forest documents and summarize the regions a dataset occupies.

This is an independent reader of the forest format: it shares no code with
the main engine, so manifests written here double as a cross-check of the
engine's own routing.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def route_tree(tree: dict, X: np.ndarray) -> np.ndarray:
    """Leaf position reached by every row. Right when test value >= threshold."""
    out = np.empty(len(X), dtype=np.int64)

    def descend(ref: int, mask: np.ndarray) -> None:
        if ref < 0:
            out[mask] = -ref - 1
            return
        node = tree["nodes"][ref]
        if node["kind"] == "axis":
            go_right = X[:, node["feature"]] >= node["threshold"]
        else:
            go_right = X @ np.asarray(node["weights"], dtype=np.float64) >= node["bias"]
        descend(node["left"], mask & ~go_right)
        descend(node["right"], mask & go_right)

    descend(0 if tree["nodes"] else -1, np.ones(len(X), dtype=bool))
    return out


def route_forest(doc: dict, X: np.ndarray) -> np.ndarray:
    """(N, T) matrix of leaf positions, one column per tree."""
    X = np.asarray(X, dtype=np.float64)
    return np.stack([route_tree(t, X) for t in doc["trees"]], axis=1)


def _weights(doc: dict) -> np.ndarray:
    return np.asarray(
        doc.get("tree_weights", [1.0] * len(doc["trees"])), dtype=np.float64
    )


def predict_forest(doc: dict, X: np.ndarray) -> np.ndarray:
    """(N, K) aggregated leaf vectors for every row.

    Uniform forests sum the per-tree vectors and divide once, the exact
    operation order of the usual trainers, so exported predictions compare
    bit for bit."""
    X = np.asarray(X, dtype=np.float64)
    w = _weights(doc)
    acc = np.zeros((len(X), doc["K"]), dtype=np.float64)
    uniform = bool((w == w[0]).all())
    for wt, tree in zip(w, doc["trees"]):
        vals = np.asarray([leaf["value"] for leaf in tree["leaves"]], dtype=np.float64)
        picked = vals[route_tree(tree, X)]
        acc += picked if uniform else wt * picked
    return acc / (len(w) if uniform else w.sum())


def region_output(doc: dict, key) -> np.ndarray:
    # weighted mean as a dot product, matching the engine's evaluation order
    w = _weights(doc)
    vectors = np.stack(
        [
            np.asarray(tree["leaves"][leaf]["value"], dtype=np.float64)
            for tree, leaf in zip(doc["trees"], key)
        ]
    )
    return w @ vectors / w.sum()


def forest_manifest(doc: dict, X: np.ndarray, sample: int = 8) -> dict:
    """Manifest of the live regions: count, a key sample, and summary stats.

    Region keys are the distinct leaf tuples the rows reach, in ascending
    order. For classifiers the stats count regions per predicted label, for
    regressors they give the range of region outputs; both match what the
    engine's index reports for the same forest and data.
    """
    X = np.asarray(X, dtype=np.float64)
    keys = np.unique(route_forest(doc, X), axis=0)
    outputs = np.stack([region_output(doc, key) for key in keys])
    stats: dict = {
        "task": doc["task"],
        "D": doc["D"],
        "K": doc["K"],
        "T": len(doc["trees"]),
        "N": int(len(X)),
    }
    if doc["task"] == "classification":
        labels = np.argmax(outputs, axis=1)
        stats["groups"] = {
            str(k): int((labels == k).sum()) for k in range(doc["K"]) if (labels == k).any()
        }
    else:
        stats["groups"] = {
            "min": float(outputs[:, 0].min()),
            "max": float(outputs[:, 0].max()),
        }
    return {
        "M": int(len(keys)),
        "keys_sample": [[int(v) for v in key] for key in keys[:sample]],
        "stats": stats,
    }


def write_manifest(manifest: dict, path) -> None:
    Path(path).write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n")
