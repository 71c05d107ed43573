"""Gradient-descent DeepWalk embeddings on stochastic block model graphs."""

from .errors import EigensolverError, IsolatedNodeError, NumericalError, ValidationError
from .metrics import ClusterReport, cluster_report, recovery_fraction, trajectory_distance
from .sbm import Graph, SbmParams, expected_adjacency, generate_sbm, read_graph, write_graph
from .theory import (
    BlockValues,
    LinearUpdate,
    block_values,
    build_linear_update,
    cbar_spectrum,
    concentration_ratio,
    expected_cooccurrence,
    transition_deviation,
)
from .trainer import (
    EmbeddingState,
    TrainConfig,
    Trajectory,
    gd_step,
    gradient,
    linear_step,
    objective,
    run_deepwalk,
    run_linearized,
    softmax_matrix,
)
from .walks import CoocMatrix, WalkConfig, build_cooccurrence, limiting_cooccurrence, sample_walk

__all__ = [
    "BlockValues", "ClusterReport", "CoocMatrix", "EigensolverError", "EmbeddingState", "Graph",
    "IsolatedNodeError", "LinearUpdate", "NumericalError", "SbmParams", "TrainConfig", "Trajectory",
    "ValidationError", "WalkConfig", "block_values", "build_cooccurrence", "build_linear_update",
    "cbar_spectrum", "cluster_report", "concentration_ratio", "expected_adjacency",
    "expected_cooccurrence", "gd_step", "generate_sbm", "gradient", "limiting_cooccurrence",
    "linear_step", "objective", "read_graph", "recovery_fraction", "run_deepwalk", "run_linearized",
    "sample_walk", "softmax_matrix", "trajectory_distance", "transition_deviation", "write_graph",
]
