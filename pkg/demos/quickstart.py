"""Load a forest, predict, and ask for the nearest point that changes the
prediction.

The engine answers counterfactual queries against regions of the forest's
input partition that contain at least one dataset row, so every answer is
backed by a region some real instance actually occupies.
"""
from pathlib import Path

import numpy as np

from lire import (
    CEQuery,
    TargetSet,
    build_index,
    find_ce,
    load_forest,
    predict,
)

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def main() -> None:
    forest = load_forest(FIXTURES / "toy_forest.json")
    X = np.loadtxt(FIXTURES / "toy_data.csv", delimiter=",", ndmin=2)
    print(f"forest: {forest.T} trees, D={forest.D}, task={forest.task}")
    print(f"data: {len(X)} rows")

    source = np.array([0.2, 0.1])
    pred = predict(forest, source)
    print(f"\nsource {source.tolist()} -> class {pred.label}, vector {pred.vector.round(3).tolist()}")

    # index the regions that contain at least one data row
    index = build_index(forest, X)
    print(f"index: {index.M} live regions out of {len(X)} rows")

    # nearest point the forest classifies as 1
    query = CEQuery(source, TargetSet.for_classes([1]))
    res = find_ce(forest, index, query)
    print(f"\ncounterfactual: x={np.round(res.x, 6).tolist()}")
    print(f"  squared-euclidean distance {res.distance:.6f}")
    print(f"  region {res.region}, witnessed by data row {res.witness}")
    print(f"  regions scanned: {res.scanned}")

    check = predict(forest, res.x)
    print(f"  re-check: forest now predicts class {check.label}")


if __name__ == "__main__":
    main()
