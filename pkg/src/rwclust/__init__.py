"""Clustering of random-walk panels via rank + histogram representations.

Pipeline: load a level panel, difference it, project each increment series
onto (rank vector, shared-grid histogram), compute the blended
dependence/distribution distance matrix, cluster it, and summarize. A
synthetic generator with planted ground truth supports end-to-end checks.
"""

from .clustering import (
    ClusterAssignment,
    ClusterSummary,
    ClusterSummaryRow,
    StabilityReport,
    adjusted_rand,
    cluster,
    cluster_summary,
    minimal_matching,
    stability_select_k,
)
from .distance import (
    DistanceMatrix,
    DistanceParams,
    d0_empirical,
    d1_empirical,
    d_theta,
    distance_matrix,
)
from .errors import (
    BinningRangeError,
    DegenerateSampleError,
    DimensionError,
    GridCompatibilityError,
    InsufficientDataError,
    PanelFormatError,
    ParameterError,
    RwclustError,
    ValidationError,
)
from .ingestion import (
    IncrementPanel,
    IngestionOptions,
    SeriesPanel,
    as_increments,
    load_panel,
    to_increments,
)
from .representation import (
    BinnedDensity,
    BinningConfig,
    NonParamRepresentation,
    RankVector,
    SeriesRepresentation,
    empirical_margin,
    rank_function,
    represent,
    shared_grid,
)
from .synthetic import (
    CorrelationBlock,
    DistributionGroup,
    GroundTruth,
    SyntheticSpec,
    generate_panel,
    score_recovery,
)

__version__ = "0.1.0"

__all__ = [
    "BinnedDensity",
    "BinningConfig",
    "BinningRangeError",
    "ClusterAssignment",
    "ClusterSummary",
    "ClusterSummaryRow",
    "CorrelationBlock",
    "DegenerateSampleError",
    "DimensionError",
    "DistanceMatrix",
    "DistanceParams",
    "DistributionGroup",
    "GridCompatibilityError",
    "GroundTruth",
    "IncrementPanel",
    "IngestionOptions",
    "InsufficientDataError",
    "NonParamRepresentation",
    "PanelFormatError",
    "ParameterError",
    "RankVector",
    "RwclustError",
    "SeriesPanel",
    "SeriesRepresentation",
    "StabilityReport",
    "SyntheticSpec",
    "ValidationError",
    "adjusted_rand",
    "as_increments",
    "cluster",
    "cluster_summary",
    "d0_empirical",
    "d1_empirical",
    "d_theta",
    "distance_matrix",
    "empirical_margin",
    "generate_panel",
    "load_panel",
    "minimal_matching",
    "rank_function",
    "represent",
    "score_recovery",
    "shared_grid",
    "stability_select_k",
    "to_increments",
]
