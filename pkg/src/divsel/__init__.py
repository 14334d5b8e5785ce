"""divsel: budget-constrained diversity-based sample selection.

Select which frames of a driving dataset to annotate under a realistic
frame+box cost model, using spatial (road-manifold), temporal and feature
diversity with a greedy k-Center loop. Random and entropy baselines and a
synthetic trajectory simulator are included for comparison studies.
"""

__version__ = "0.1.0"

from .config import RunConfig
from .errors import (
    BudgetTooSmallError,
    ConfigError,
    DataError,
    DimensionMismatchError,
    DivselError,
    DuplicateIdError,
    InconsistentFeatureDimError,
    MissingFieldError,
    NoActiveTermError,
    NonPositiveScaleError,
    ParseError,
    SchemaError,
    TooFewSamplesError,
    UnknownIdError,
)
from .estimator import DiversitySelector
from .geo_graph import (
    EuclideanSpatialIndex,
    KnnGraph,
    build_knn_graph,
    dump_edges,
    euclidean_spatial_distance,
    manifold_distances_from,
)
from .manifest import (
    DatasetManifest,
    SampleRecord,
    load_manifest,
    validate_for_strategy,
    write_manifest,
)
from .metric import (
    DistanceTermConfig,
    TermScales,
    aggregate,
    estimate_scales,
    feature_distance,
    normalize,
    temporal_distance,
)
from .selector import (
    AggregatedMetric,
    BudgetSchedule,
    CostModel,
    CycleRecord,
    SelectionReport,
    SelectionState,
    annotation_cost,
    entropy_select_cycle,
    greedy_select_cycle,
    initialize_labeled,
    random_select_cycle,
    refresh_min_dist,
    run_schedule,
)
from .simharness import (
    CoverageReport,
    Hotspot,
    TrajectoryConfig,
    evaluate_selection,
    generate_trajectories,
    standard_hotspot_scenario,
)

__all__ = [
    "__version__",
    "AggregatedMetric",
    "BudgetSchedule",
    "BudgetTooSmallError",
    "ConfigError",
    "CostModel",
    "CoverageReport",
    "CycleRecord",
    "DataError",
    "DatasetManifest",
    "DimensionMismatchError",
    "DistanceTermConfig",
    "DiversitySelector",
    "DivselError",
    "DuplicateIdError",
    "EuclideanSpatialIndex",
    "Hotspot",
    "InconsistentFeatureDimError",
    "KnnGraph",
    "MissingFieldError",
    "NoActiveTermError",
    "NonPositiveScaleError",
    "ParseError",
    "RunConfig",
    "SampleRecord",
    "SchemaError",
    "SelectionReport",
    "SelectionState",
    "TermScales",
    "TooFewSamplesError",
    "TrajectoryConfig",
    "UnknownIdError",
    "aggregate",
    "annotation_cost",
    "build_knn_graph",
    "dump_edges",
    "entropy_select_cycle",
    "estimate_scales",
    "euclidean_spatial_distance",
    "evaluate_selection",
    "feature_distance",
    "generate_trajectories",
    "greedy_select_cycle",
    "initialize_labeled",
    "load_manifest",
    "manifold_distances_from",
    "normalize",
    "random_select_cycle",
    "refresh_min_dist",
    "run_schedule",
    "standard_hotspot_scenario",
    "temporal_distance",
    "validate_for_strategy",
    "write_manifest",
]
