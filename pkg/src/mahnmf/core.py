"""Dense matrix helpers, distances and the factor container.

Throughout the package a factorization is stored as ``X ~ W.T @ H`` with
``X`` of shape (m, n), ``W`` of shape (r, m) and ``H`` of shape (r, n).
Matrices are plain float64 numpy arrays.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError

INIT_FLOOR = 1e-10


def as_matrix(A, name="matrix", nonneg=False):
    """Return ``A`` as a 2-D float64 array, validating shape and sign."""
    M = np.asarray(A, dtype=np.float64)
    if M.ndim == 1:
        M = M.reshape(1, -1)
    if M.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got ndim={M.ndim}")
    if not np.all(np.isfinite(M)):
        raise DomainError(f"{name} contains non-finite entries")
    if nonneg and M.size and M.min() < 0:
        raise DomainError(f"{name} must be non-negative (min entry {M.min():.3g})")
    return M


def _same_shape(A, B):
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch: {A.shape} vs {B.shape}")
    return A, B


def manhattan_distance(A, B):
    """Sum of absolute entry-wise differences ``sum |A - B|``."""
    A, B = _same_shape(A, B)
    return float(np.abs(A - B).sum())


def frobenius_sq(A, B):
    """Squared Frobenius distance ``sum (A - B)**2``."""
    A, B = _same_shape(A, B)
    D = A - B
    return float(np.einsum("ij,ij->", D, D))


def column_l2_norms(W):
    """Euclidean norm of every column of ``W``.

    For a basis ``W`` of shape (r, m) this gives the m per-row dual weights
    used by the smoothed objective.
    """
    W = as_matrix(W, "W")
    return np.sqrt(np.einsum("ij,ij->j", W, W))


def check_compose(X, W, H):
    X = as_matrix(X, "X")
    W = as_matrix(W, "W")
    H = as_matrix(H, "H")
    m, n = X.shape
    if W.shape[0] != H.shape[0] or W.shape[1] != m or H.shape[1] != n:
        raise DimensionError(
            f"factors W{W.shape}, H{H.shape} do not compose to X{X.shape}"
        )
    return X, W, H


def objective(X, F):
    """Manhattan objective ``||X - W.T H||_M`` of a :class:`FactorPair`."""
    X, W, H = check_compose(X, F.W, F.H)
    return float(np.abs(X - W.T @ H).sum())


@dataclass(frozen=True)
class FactorPair:
    """Non-negative factors with ``X ~ W.T @ H``."""

    W: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        W = as_matrix(self.W, "W", nonneg=True)
        H = as_matrix(self.H, "H", nonneg=True)
        if W.shape[0] != H.shape[0]:
            raise DimensionError(f"rank mismatch: W{W.shape} vs H{H.shape}")
        r, m = W.shape
        n = H.shape[1]
        if r > min(m, n):
            raise DimensionError(f"rank {r} exceeds min(m, n) = {min(m, n)}")
        if 2 * r > min(m, n):
            warnings.warn(
                f"rank {r} is not small relative to min(m, n) = {min(m, n)}",
                stacklevel=3,
            )
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "H", H)

    @property
    def rank(self):
        return self.W.shape[0]

    def reconstruct(self):
        return self.W.T @ self.H

    def permuted(self, order):
        order = np.asarray(order)
        return FactorPair(self.W[order], self.H[order])


def random_init(X, rank, seed=0, floor=INIT_FLOOR):
    """Seeded random factors with ``mean(W.T H) == mean(X)``.

    Entries are drawn uniformly from (0, 1], rescaled jointly and floored at
    ``floor`` so no coordinate starts locked at exactly zero.
    """
    X = as_matrix(X, "X", nonneg=True)
    m, n = X.shape
    rng = np.random.default_rng(seed)
    W = 1.0 - rng.random((rank, m))
    H = 1.0 - rng.random((rank, n))
    peak = X.max() if X.size else 0.0
    # mean taken after scaling by the peak so huge inputs do not overflow
    target = peak * (X / peak).mean() if peak > 0 else 0.0
    current = (W.sum(axis=1) @ H.sum(axis=1)) / (m * n)
    scale = np.sqrt(target) / np.sqrt(current) if target > 0 else 0.0
    W = np.maximum(W * scale, floor)
    H = np.maximum(H * scale, floor)
    return FactorPair(W, H)
