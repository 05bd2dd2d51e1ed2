"""Queries with locked features, per-feature bounds, margins, and metrics.

Real counterfactuals usually cannot change every feature: some are immutable
(age cannot decrease, a category is fixed) and some must stay in a plausible
range. Queries express that directly and the search only considers regions
whose boxes still intersect the constraints.
"""
from pathlib import Path

import numpy as np

from lire import (
    AllRegionsInfeasibleError,
    CEQuery,
    DistanceMetric,
    TargetSet,
    build_index,
    find_ce,
    load_forest,
    predict,
)

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def show(tag, res):
    print(f"{tag:28s} x={np.round(res.x, 6).tolist()}  d={res.distance:.6f}  region={res.region}")


def main() -> None:
    forest = load_forest(FIXTURES / "toy_forest.json")
    X = np.loadtxt(FIXTURES / "toy_data.csv", delimiter=",", ndmin=2)
    index = build_index(forest, X)
    source = np.array([0.2, 0.1])
    target = TargetSet.for_classes([1])

    show("unconstrained", find_ce(forest, index, CEQuery(source, target)))

    # lock feature 1 at its current value: only feature 0 may move
    res = find_ce(forest, index, CEQuery(source, target, fixed={1: 0.1}))
    show("fixed x1=0.1", res)

    # allow feature 1 to move, but only inside [0.0, 0.3]
    res = find_ce(forest, index, CEQuery(source, target, bounds={1: (0.0, 0.3)}))
    show("bounded x1 in [0,0.3]", res)

    # city-block distance instead of squared euclidean
    res = find_ce(forest, index, CEQuery(source, target, DistanceMetric("l1")))
    show("l1 metric", res)

    # per-feature weights make feature 0 a hundred times costlier to move
    metric = DistanceMetric("l2sq", np.array([100.0, 1.0]))
    res = find_ce(forest, index, CEQuery(source, target, metric))
    show("weighted (100, 1)", res)

    # margin pushes the answer off the region face, toward its witness
    res = find_ce(forest, index, CEQuery(source, target, margin=0.01))
    show("margin 0.01", res)
    print(f"{'':28s} re-check: class {predict(forest, res.x).label}")

    # contradictory constraints are reported, not silently dropped
    try:
        find_ce(forest, index, CEQuery(source, target, fixed={0: 0.2}))
    except AllRegionsInfeasibleError as exc:
        print(f"\nfixed x0=0.2 is impossible here: {exc}")


if __name__ == "__main__":
    main()
