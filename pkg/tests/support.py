"""Fixture paths and random-instance generators shared by the test suite."""

import json
from pathlib import Path

import numpy as np

FIXTURES = Path(__file__).parent.parent / "fixtures"


def load_doc(name: str) -> dict:
    return json.loads((FIXTURES / name).read_text())


def load_rows(name: str) -> np.ndarray:
    data = np.loadtxt(FIXTURES / name, delimiter=",", dtype=np.float64, ndmin=2)
    return data


def random_leaf_value(rng: np.random.Generator, task: str, K: int) -> list[float]:
    if task == "regression":
        return [float(rng.uniform(-2.0, 2.0))]
    raw = rng.uniform(0.05, 1.0, size=K)
    raw /= raw.sum()
    # round so the json stays tidy, then renormalize exactly
    raw = np.round(raw, 6)
    raw[0] += 1.0 - raw.sum()
    return [float(v) for v in raw]


def random_axis_tree_doc(
    rng: np.random.Generator,
    D: int,
    depth: int,
    task: str = "classification",
    K: int = 2,
    lattice: float | None = 0.05,
    lo: float = 0.1,
    hi: float = 0.9,
) -> dict:
    """A random tree of exactly the given depth on features in [0, 1].

    With ``lattice`` set, thresholds snap to that grid so partition cells
    are never thinner than one lattice step.
    """
    nodes: list[dict] = []
    leaves: list[dict] = []

    def threshold() -> float:
        if lattice is None:
            return float(rng.uniform(lo, hi))
        steps = int(round((hi - lo) / lattice))
        return float(lo + lattice * rng.integers(0, steps + 1))

    def build(level: int) -> int:
        if level == depth:
            leaves.append({"value": random_leaf_value(rng, task, K)})
            return -len(leaves)
        my = len(nodes)
        nodes.append(
            {
                "kind": "axis",
                "feature": int(rng.integers(0, D)),
                "threshold": threshold(),
                "left": 0,
                "right": 0,
            }
        )
        nodes[my]["left"] = build(level + 1)
        nodes[my]["right"] = build(level + 1)
        return my

    build(0)
    return {"nodes": nodes, "leaves": leaves}


def random_forest_doc(
    rng: np.random.Generator,
    T: int,
    D: int,
    depth: int = 2,
    task: str = "classification",
    K: int = 2,
    lattice: float | None = 0.05,
    weighted: bool = False,
) -> dict:
    if task == "regression":
        K = 1
    trees = [
        random_axis_tree_doc(rng, D, int(rng.integers(1, depth + 1)), task, K, lattice)
        for _ in range(T)
    ]
    doc = {"version": 1, "task": task, "D": D, "K": K, "trees": trees}
    if weighted:
        doc["tree_weights"] = [float(rng.uniform(0.5, 2.0)) for _ in range(T)]
    return doc


def random_oblique_tree_doc(
    rng: np.random.Generator,
    D: int,
    depth: int,
    task: str = "classification",
    K: int = 2,
) -> dict:
    nodes: list[dict] = []
    leaves: list[dict] = []

    def build(level: int) -> int:
        if level == depth:
            leaves.append({"value": random_leaf_value(rng, task, K)})
            return -len(leaves)
        my = len(nodes)
        if rng.random() < 0.5:
            node = {
                "kind": "axis",
                "feature": int(rng.integers(0, D)),
                "threshold": float(rng.uniform(0.2, 0.8)),
                "left": 0,
                "right": 0,
            }
        else:
            w = rng.normal(size=D)
            w /= np.linalg.norm(w)
            point = rng.uniform(0.25, 0.75, size=D)
            node = {
                "kind": "oblique",
                "weights": [float(v) for v in w],
                "bias": float(w @ point),
                "left": 0,
                "right": 0,
            }
        nodes.append(node)
        nodes[my]["left"] = build(level + 1)
        nodes[my]["right"] = build(level + 1)
        return my

    build(0)
    return {"nodes": nodes, "leaves": leaves}


def random_oblique_forest_doc(
    rng: np.random.Generator,
    T: int,
    D: int,
    depth: int = 2,
    task: str = "classification",
    K: int = 2,
) -> dict:
    if task == "regression":
        K = 1
    return {
        "version": 1,
        "task": task,
        "D": D,
        "K": K,
        "trees": [random_oblique_tree_doc(rng, D, int(rng.integers(1, depth + 1)), task, K) for _ in range(T)],
    }


def random_polytope(rng: np.random.Generator, D: int, m: int):
    """m halfspaces G x <= h with a guaranteed strictly interior point."""
    z = rng.uniform(-0.5, 0.5, size=D)
    G = rng.normal(size=(m, D))
    G /= np.linalg.norm(G, axis=1, keepdims=True)
    h = G @ z + rng.uniform(0.05, 1.0, size=m)
    return G, h, z


def forest_of(doc: dict):
    from lire import forest_from_dict

    return forest_from_dict(doc)
