"""Clustering with few one-versus-all distance queries via landmark balls."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    AlgorithmParams,
    Clustering,
    ParameterError,
    TheoryParams,
    derive_params,
    derive_params_practical,
    rng_stream,
)
from .evaluation import brute_force_kmedian, classify_points, clustering_distance, kmedian_cost  # noqa: E402
from .expansion import NoCluster, PartialClustering, expand_landmarks  # noqa: E402
from .oracle import CountingOracle, EuclideanOracle, MatrixOracle, check_triangle  # noqa: E402
from .pipeline import RunReport, landmark_clustering, reassign_to_reps  # noqa: E402
from .selection import LandmarkState, select_landmarks  # noqa: E402

__all__ = [
    "AlgorithmParams",
    "Clustering",
    "CountingOracle",
    "EuclideanOracle",
    "LandmarkState",
    "MatrixOracle",
    "NoCluster",
    "ParameterError",
    "PartialClustering",
    "RunReport",
    "TheoryParams",
    "brute_force_kmedian",
    "check_triangle",
    "classify_points",
    "clustering_distance",
    "derive_params",
    "derive_params_practical",
    "expand_landmarks",
    "kmedian_cost",
    "landmark_clustering",
    "reassign_to_reps",
    "rng_stream",
    "select_landmarks",
]
