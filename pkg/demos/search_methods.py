"""The three search methods and how their answers relate.

- exact_search scans every geometrically nonempty region of the partition,
  so it returns the true minimum distance.
- find_ce scans only live regions (those holding at least one data row), so
  its answer is at least the exact one but always lands where data lives.
- dataset_search returns the nearest qualifying data row itself, the
  classic nearest-neighbour baseline, which can only be farther still.

On any query: d_exact <= d_live <= d_dataset. The gap fixture is built to
make all three differ. A region budget turns find_ce into an anytime
search: more budget never hurts, and full budget equals no budget.
"""
from pathlib import Path

import numpy as np

from lire import (
    CEQuery,
    TargetSet,
    build_index,
    dataset_search,
    enumerate_nonempty_regions,
    exact_search,
    find_ce,
    load_forest,
)

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def main() -> None:
    forest = load_forest(FIXTURES / "gap_forest.json")
    X = np.loadtxt(FIXTURES / "gap_data.csv", delimiter=",", ndmin=2)
    index = build_index(forest, X)
    regions = enumerate_nonempty_regions(forest)
    print(f"nonempty regions: {regions.M}, live regions: {index.M}, rows: {len(X)}")

    source = np.array([0.0])
    query = CEQuery(source, TargetSet.for_classes([1]))

    exact = exact_search(forest, regions, query)
    live = find_ce(forest, index, query)
    data = dataset_search(forest, X, query)
    print(f"\nsource {source.tolist()}, target class 1 (squared euclidean):")
    print(f"  exact   d={exact.distance:.1f}  x={exact.x.tolist()}   (true minimum, region may hold no data)")
    print(f"  live    d={live.distance:.1f}  x={live.x.tolist()}   (nearest region containing a data row)")
    print(f"  dataset d={data.distance:.1f}  x={data.x.tolist()}   (nearest qualifying row itself)")
    assert exact.distance <= live.distance <= data.distance

    # anytime behaviour on a larger index
    forest = load_forest(FIXTURES / "toy_forest.json")
    X = np.loadtxt(FIXTURES / "toy_data.csv", delimiter=",", ndmin=2)
    index = build_index(forest, X)
    source = np.array([0.9, 0.9])
    target = TargetSet.for_classes([0])
    print("\nregion budgets on the toy forest (distance can only improve):")
    for budget in (1, 2, 3, 4):
        res = find_ce(forest, index, CEQuery(source, target, budget_regions=budget))
        tail = "anytime" if res.anytime else "complete"
        print(f"  budget {budget}: d={res.distance:.6f} after {res.scanned} regions ({tail})")


if __name__ == "__main__":
    main()
