"""Canonical JSON helpers shared by index, query, and report documents.

Serialization is byte-reproducible: keys sorted, no whitespace, floats via
repr round-trip, infinities encoded as the strings "inf" and "-inf".
"""
from __future__ import annotations

import json
import math


def canonical_dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)


def encode_float(v: float):
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        raise ValueError("NaN cannot be serialized")
    return v


def decode_float(v) -> float:
    if v == "inf":
        return math.inf
    if v == "-inf":
        return -math.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"expected a number, got {v!r}")
    return float(v)
