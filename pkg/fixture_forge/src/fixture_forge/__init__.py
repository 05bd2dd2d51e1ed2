"""Train small decision forests and export them as forest-format fixtures.

The exporter turns scikit-learn tree ensembles into the JSON forest format,
the router re-reads those documents independently of the main engine, and
the manifest module summarizes which partition regions a dataset occupies.
"""
from .datasets import blobs, iris, sine, split_band, write_csv
from .export import UnsupportedModelError, export_forest
from .manifest import (
    forest_manifest,
    predict_forest,
    region_output,
    route_forest,
    write_manifest,
)

__all__ = [
    "UnsupportedModelError",
    "blobs",
    "export_forest",
    "forest_manifest",
    "iris",
    "predict_forest",
    "region_output",
    "route_forest",
    "sine",
    "split_band",
    "write_csv",
    "write_manifest",
]
