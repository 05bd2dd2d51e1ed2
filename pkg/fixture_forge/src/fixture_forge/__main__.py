"""Regenerate the committed fixture sets.

Each set is a trained forest exported to the forest format, the CSV it was
trained on, and a manifest of the live regions. When the `lire` command is
on PATH a golden index file is written alongside, built by the engine
itself through its CLI.
"""
from __future__ import annotations

import argparse
import shutil
import subprocess
from pathlib import Path

import numpy as np
from sklearn.ensemble import RandomForestClassifier, RandomForestRegressor
from sklearn.tree import DecisionTreeClassifier

from .datasets import blobs, iris, sine, split_band, write_csv
from .export import export_forest
from .manifest import forest_manifest, write_manifest


def _emit(name: str, model, X, y, out: Path, with_index: bool) -> None:
    model.fit(X, y)
    doc = export_forest(model, out / f"{name}_forest.json")
    write_csv(X, y, out / f"{name}_data.csv")
    write_manifest(forest_manifest(doc, X), out / f"{name}_manifest.json")
    produced = [f"{name}_forest.json", f"{name}_data.csv", f"{name}_manifest.json"]
    if with_index:
        subprocess.run(
            [
                "lire", "index",
                "--model", str(out / f"{name}_forest.json"),
                "--data", str(out / f"{name}_data.csv"),
                "--header", "--label-col", str(X.shape[1]),
                "--index", str(out / f"{name}_index.json"),
            ],
            check=True,
            capture_output=True,
        )
        produced.append(f"{name}_index.json")
    print(f"{name}: {', '.join(produced)}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fixture_forge")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    with_index = shutil.which("lire") is not None

    X, y = blobs(rng)
    _emit(
        "blobs",
        RandomForestClassifier(n_estimators=3, max_depth=2, random_state=args.seed),
        X, y, out, with_index,
    )
    X, y = sine(rng)
    _emit(
        "sine",
        RandomForestRegressor(n_estimators=4, max_depth=3, random_state=args.seed),
        X, y, out, with_index,
    )
    X, y = split_band(rng)
    _emit(
        "band",
        DecisionTreeClassifier(max_depth=1, random_state=args.seed),
        X, y, out, with_index,
    )
    X, y = iris()
    _emit(
        "iris",
        RandomForestClassifier(n_estimators=3, max_depth=3, random_state=args.seed),
        X, y, out, with_index,
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
