"""Region enumeration, growth curves, and the on-disk index format.

A forest of axis trees partitions the input space into boxes. The number of
geometrically nonempty boxes grows with every tree added, while the number
of live boxes (those containing a data row) can never exceed the number of
rows. The index of live regions serializes to a canonical JSON document:
building it twice, or round-tripping through the file, is byte-identical.
"""
from pathlib import Path
from tempfile import TemporaryDirectory

import numpy as np

from lire import (
    TargetSet,
    build_index,
    deserialize_index,
    load_forest,
    region_growth_curve,
    select_target_regions,
    serialize_index,
)

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def main() -> None:
    forest = load_forest(FIXTURES / "toy_forest.json")
    X = np.loadtxt(FIXTURES / "toy_data.csv", delimiter=",", ndmin=2)

    print("growth as trees are added (upper bound = product of leaf counts):")
    curve = region_growth_curve(forest, X, "by-trees")
    for s in curve.steps:
        print(f"  {s.step} trees: <= {s.upper_bound}  nonempty {s.nonempty}  live {s.live}")

    index = build_index(forest, X)
    print(f"\nlive index: M={index.M} regions, labels per group {index.group_sizes()}")

    # the serialized form is canonical: build twice, compare bytes
    text = serialize_index(index)
    again = serialize_index(build_index(forest, X))
    print(f"serialized: {len(text)} bytes, rebuild identical: {text == again}")

    with TemporaryDirectory() as tmp:
        path = Path(tmp) / "toy_index.json"
        path.write_text(text)
        reloaded = deserialize_index(path.read_text(), forest)
        print(f"round trip identical: {serialize_index(reloaded) == text}")

    # target selection returns contiguous row ranges of the grouped index
    for classes in ([1], [0], [0, 1]):
        ranges = select_target_regions(index, TargetSet.for_classes(classes))
        rows = sum(e - s for s, e in ranges)
        print(f"regions predicting {classes}: ranges {ranges} ({rows} regions)")


if __name__ == "__main__":
    main()
