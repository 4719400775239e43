"""Fair clustering through jointly bounded KL fairness and clustering terms.

The solver minimizes ``clustering objective + trade_off * KL fairness
penalty`` over soft cluster assignments with closed-form, per-point simplex
updates, for K-means, K-median and Normalized-Cut objectives.
"""

from .core import (
    AffinityGraph,
    ClusteringProblem,
    DemographicPartition,
    SolveResult,
    SolverConfig,
    binarize,
    check_soft_assignment,
    hard_labels,
)
from .datasets import (
    Dataset,
    export_csv,
    kmeanspp_seed,
    knn_affinity,
    load_csv,
    load_profile,
    make_synthetic,
    preprocess,
)
from .estimator import FairClustering
from .fairness import (
    cluster_marginals,
    fairness_bound_potentials,
    fairness_error,
    fairness_penalty,
    fairness_penalty_gradient,
    kl_divergence,
)
from .metrics import cluster_balance, min_balance
from .objectives import (
    discrete_objective,
    kmeans_potentials,
    kmedian_potentials,
    ncut_potentials,
)
from .solver import (
    EnergyBreakdown,
    SweepResult,
    auxiliary_value,
    lambda_sweep,
    softmax_update,
    solve,
    total_energy,
)

__version__ = "0.1.0"

__all__ = [
    "AffinityGraph",
    "ClusteringProblem",
    "Dataset",
    "DemographicPartition",
    "EnergyBreakdown",
    "FairClustering",
    "SolveResult",
    "SolverConfig",
    "SweepResult",
    "auxiliary_value",
    "binarize",
    "check_soft_assignment",
    "cluster_balance",
    "cluster_marginals",
    "discrete_objective",
    "export_csv",
    "fairness_bound_potentials",
    "fairness_error",
    "fairness_penalty",
    "fairness_penalty_gradient",
    "hard_labels",
    "kl_divergence",
    "kmeans_potentials",
    "kmeanspp_seed",
    "kmedian_potentials",
    "knn_affinity",
    "lambda_sweep",
    "load_csv",
    "load_profile",
    "make_synthetic",
    "min_balance",
    "ncut_potentials",
    "preprocess",
    "softmax_update",
    "solve",
    "total_energy",
]
