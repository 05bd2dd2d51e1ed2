"""Compare the search methods on one forest and dataset.

The protocol draws source rows from the dataset, assigns each a target the
index can actually reach, runs every method on every query, and reports
mean and standard deviation of distance and runtime, normalized so the
live-region search reads 1.0. Distances are shown in euclidean units.
"""
from pathlib import Path

import numpy as np

from lire import load_forest
from lire.bench import format_report, run_benchmark

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def main() -> None:
    forest = load_forest(FIXTURES / "toy_forest.json")
    X = np.loadtxt(FIXTURES / "toy_data.csv", delimiter=",", ndmin=2)

    report = run_benchmark(forest, X, n_queries=10, seed=7)
    print(format_report(report))

    data = report.methods["dataset"]
    exact = report.methods["exact"]
    print(f"dataset baseline is {data.normalized_mean:.2f}x the live-region distance")
    print(f"exact search reaches {exact.normalized_mean:.2f}x (<= 1 by construction)")


if __name__ == "__main__":
    main()
