"""k-means, δ-k-means and a classical emulation of q-means."""

from .clustering import ClusteringRun, kmeanspp_init, run
from .emulation import CentroidSet, ErrorBudget, noisy_distance_matrix, recover_centroids
from .errors import QMeansError
from .harness import ExperimentConfig, emit_table, run_experiment
from .matrixcore import DataMatrix, condition_number, mu, normalize_min_norm, pca_project, svd
from .metrics import accuracy, all_metrics, info_metrics, rmsec
from .qram import QramTree, build_tree
from .resources import CostProfile, cost_report, general_runtime, wc_runtime
from .wellcluster import (
    WellClusterableParams,
    check_well_clusterable,
    delta_window,
    gaussian_benchmark,
    generate_well_clusterable,
    verify_claims,
)

__version__ = "0.1.0"
