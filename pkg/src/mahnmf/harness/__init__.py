"""Synthetic data, noise, graphs, metrics and the Euclidean baseline."""

from .baseline import eucnmf_baseline
from .graph import GraphSpec, image_similarity, knn_laplacian, normalize_similarity
from .metrics import factor_sparseness, relative_error, sparseness
from .synth import NOISE_KINDS, NoiseSpec, gen_low_rank_plus_sparse, inject_noise

__all__ = [
    "GraphSpec", "NOISE_KINDS", "NoiseSpec", "eucnmf_baseline", "factor_sparseness",
    "gen_low_rank_plus_sparse", "image_similarity", "inject_noise", "knn_laplacian",
    "normalize_similarity", "relative_error", "sparseness",
]
