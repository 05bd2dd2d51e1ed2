"""Small synthetic tabular datasets for fixture training."""
from __future__ import annotations

from pathlib import Path

import numpy as np


def blobs(rng: np.random.Generator, n_per_class: int = 50):
    """Three gaussian blobs in 2-D, labels 0..2."""
    centers = np.array([[0.25, 0.25], [0.75, 0.3], [0.5, 0.8]])
    X = np.vstack(
        [rng.normal(c, 0.08, size=(n_per_class, 2)) for c in centers]
    )
    y = np.repeat(np.arange(3), n_per_class)
    order = rng.permutation(len(X))
    return X[order], y[order]


def sine(rng: np.random.Generator, n: int = 120):
    """Noisy sine wave on one feature."""
    X = rng.uniform(0.0, 6.3, size=(n, 1))
    y = np.sin(X[:, 0]) + rng.normal(0.0, 0.05, size=n)
    return X, y


def split_band(rng: np.random.Generator, n: int = 60):
    """One feature, two classes separated near 0.5 with some overlap."""
    X = rng.uniform(0.0, 1.0, size=(n, 1))
    y = (X[:, 0] + rng.normal(0.0, 0.05, size=n) >= 0.5).astype(int)
    return X, y


def iris():
    """The classic 150-flower measurement table bundled with sklearn."""
    from sklearn.datasets import load_iris

    data = load_iris()
    return data.data.astype(float), data.target.astype(int)


def write_csv(X: np.ndarray, y: np.ndarray, path) -> None:
    """Feature columns then a label column, with a header row."""
    D = X.shape[1]
    lines = [",".join([f"x{d}" for d in range(D)] + ["label"])]
    for feats, lab in zip(X, y):
        cells = [repr(float(v)) for v in feats]
        cells.append(repr(int(lab)) if float(lab).is_integer() else repr(float(lab)))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")
