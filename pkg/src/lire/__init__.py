"""Counterfactual explanations for decision forests via live-region search.

A decision forest partitions feature space into axis-aligned boxes or
halfspace intersections, one region per combination of leaves. Most of
those regions contain no data. This package indexes the regions that do,
then answers "what is the closest input the forest maps into this target
set" by projecting onto each candidate region, with exhaustive enumeration
and nearest-qualifying-row searches as baselines.
"""

from .bench import BenchmarkReport, format_report, run_benchmark
from .engine import (
    CEQuery,
    CEResult,
    LiveRegionIndex,
    TargetSet,
    apply_feature_constraints,
    build_index,
    dataset_search,
    deserialize_index,
    exact_search,
    find_ce,
    query_from_doc,
    query_to_doc,
    select_target_regions,
    serialize_index,
    verify_feasibility,
)
from .errors import (
    AllRegionsInfeasibleError,
    CappedRegionSetError,
    CESearchError,
    DimensionMismatchError,
    ForestFormatError,
    IndexFormatError,
    InfeasiblePolytopeError,
    InvalidRegionKeyError,
    LireError,
    NoLiveTargetRegionError,
    NoQualifyingRowError,
    NumericalDiagnosticError,
    QueryValidationError,
    TargetTaskMismatchError,
)
from .forest import (
    Forest,
    ForestStats,
    Prediction,
    Tree,
    aggregate_leaf_vectors,
    check_dataset,
    check_instance,
    forest_from_dict,
    forest_stats,
    leaf_paths,
    leaf_tuple,
    leaf_tuple_matrix,
    load_forest,
    parse_forest,
    predict,
    predict_matrix,
    route_instance,
    route_matrix,
)
from .geometry import (
    Box,
    DistanceMetric,
    Halfspace,
    distance_to_box,
    feasible_point,
    min_l1_to_polytope,
    project_to_box,
    project_to_polytope_l2,
    region_constraints,
)
from .regions import (
    GrowthCurve,
    RegionSet,
    box_intersection,
    enumerate_live_regions,
    enumerate_nonempty_regions,
    interior_box_point,
    polytope_feasible,
    region_witness_point,
    region_growth_curve,
    truncate_forest,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
