"""Popularity adjusted block models viewed as generalized random dot product graphs.

Graph generation, orthogonal spectral clustering, sparse subspace
clustering on the adjacency spectral embedding, blockwise popularity
estimation and a simulation harness.
"""

from .cluster import (AffinityMatrix, ClusteringResult, LassoProblem, gmm_cluster,
                      laplacian_eigenmap, lasso_cd, osc_affinity, partition_affinity,
                      ssc_affinity)
from .errors import (DataError, DegenerateSpectrumWarning, InvalidArgument,
                     LassoConvergenceError, NumericFailure, PabmError)
from .estimation import (LambdaEstimates, estimate_lambdas, reconstruct_P_blockwise,
                         reconstruct_P_labelfree)
from .harness import ExperimentConfig, run_detect, run_simulation, simulate_to_dir
from .metrics import ErrorReport, adjusted_rand, community_error, rmse_P
from .model import (Adjacency, LatentConfig, PabmParams, Signature, apply_indefinite_orthogonal,
                    build_permutation, build_U, edge_prob_matrix, latent_config,
                    mixture_weights, random_params, sample_adjacency, signature_for)
from .io import load_edgelist, load_similarity
from .spectral import EigenSystem, SpectralEmbedding, ase, sym_eigen

__version__ = "0.1.0"

__all__ = [
    "Adjacency",
    "adjusted_rand",
    "AffinityMatrix",
    "apply_indefinite_orthogonal",
    "ase",
    "build_permutation",
    "build_U",
    "ClusteringResult",
    "community_error",
    "DataError",
    "DegenerateSpectrumWarning",
    "edge_prob_matrix",
    "EigenSystem",
    "ErrorReport",
    "estimate_lambdas",
    "ExperimentConfig",
    "gmm_cluster",
    "InvalidArgument",
    "LambdaEstimates",
    "laplacian_eigenmap",
    "lasso_cd",
    "LassoConvergenceError",
    "LassoProblem",
    "latent_config",
    "LatentConfig",
    "load_edgelist",
    "load_similarity",
    "mixture_weights",
    "NumericFailure",
    "osc_affinity",
    "PabmError",
    "PabmParams",
    "partition_affinity",
    "random_params",
    "reconstruct_P_blockwise",
    "reconstruct_P_labelfree",
    "rmse_P",
    "run_detect",
    "run_simulation",
    "sample_adjacency",
    "Signature",
    "signature_for",
    "simulate_to_dir",
    "SpectralEmbedding",
    "ssc_affinity",
    "sym_eigen",
]
