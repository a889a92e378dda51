"""
Clustering collections of networks.

Two pipelines are provided. When all graphs share a node set,
:func:`ncge_pipeline` compares estimated link-probability matrices; when they
do not, :func:`nclm_pipeline` compares log trace-moment features. Baseline
featurizers, perturbation diagnostics and a simulation harness complete the
package.
"""

__version__ = "0.1.0"

from .graphs import (BlockmodelGraphon, EdgeListError, Graph, Graphon, MixtureModel,
                     SmoothGraphon, erdos_renyi, largest_connected_component, load_edge_list,
                     read_manifest, sample_graphon, sample_mixture, save_edge_list,
                     write_manifest)
from .linalg import NumericalError, kmeans, kmeans_fit, sym_eig, sym_eigvals
from .estimation import (estimate, estimate_naive, estimate_nbs, estimate_usvt, load_lpm,
                         save_lpm)
from .ncge import (ClusterAssignment, NodeCorrespondenceError, davis_kahan_check,
                   distance_perturbation_bound, frobenius_distance_matrix, ncge_pipeline,
                   spectral_cluster_distance)
from .nclm import (FeatureVector, MomentVector, concentration_probe, feature_distance_matrix,
                   graph_moments, kernel_from_distance, kernel_spectral_cluster,
                   log_moment_features, nclm_pipeline, relative_eigengap, tune_J, tune_t)
from .baselines import graph_stats_features, topeig_features
from .evaluation import (ExperimentConfig, clustering_error, compare_report, load_config,
                         run_scenario)

__all__ = [
    "BlockmodelGraphon", "ClusterAssignment", "EdgeListError", "ExperimentConfig",
    "FeatureVector", "Graph", "Graphon", "MixtureModel", "MomentVector",
    "NodeCorrespondenceError", "NumericalError", "SmoothGraphon",
    "clustering_error", "compare_report", "concentration_probe", "davis_kahan_check",
    "distance_perturbation_bound", "erdos_renyi", "estimate", "estimate_naive",
    "estimate_nbs", "estimate_usvt", "feature_distance_matrix", "frobenius_distance_matrix",
    "graph_moments", "graph_stats_features", "kernel_from_distance",
    "kernel_spectral_cluster", "kmeans", "kmeans_fit", "largest_connected_component",
    "load_config", "load_edge_list", "load_lpm", "log_moment_features", "ncge_pipeline",
    "nclm_pipeline", "read_manifest", "relative_eigengap", "run_scenario",
    "sample_graphon", "sample_mixture", "save_edge_list", "save_lpm",
    "spectral_cluster_distance", "sym_eig", "sym_eigvals", "topeig_features", "tune_J",
    "tune_t", "write_manifest",
]
