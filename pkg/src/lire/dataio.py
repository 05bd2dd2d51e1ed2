"""Dataset loading: headerless CSV of floats, one row per instance.

``--header`` style files carry one banner line to skip, and a label column
can be dropped since the search only consumes features.
"""
from __future__ import annotations

import io

import numpy as np


def load_csv(source, header: bool = False, label_col: int | None = None) -> np.ndarray:
    """Parse a CSV path or file-like object into an (N, D) float array."""
    X = np.loadtxt(source, delimiter=",", skiprows=1 if header else 0,
                   ndmin=2, dtype=np.float64)
    if label_col is not None:
        if not 0 <= label_col < X.shape[1]:
            raise ValueError(f"label column {label_col} out of range for {X.shape[1]} columns")
        X = np.delete(X, label_col, axis=1)
    return X


def load_csv_text(text: str, header: bool = False, label_col: int | None = None) -> np.ndarray:
    return load_csv(io.StringIO(text), header, label_col)
