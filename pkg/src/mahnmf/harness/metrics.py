"""Evaluation metrics."""

import numpy as np

from ..errors import DimensionError, DomainError


def sparseness(v):
    """Hoyer sparseness ``(sqrt(N) - ||v||_1 / ||v||_2) / (sqrt(N) - 1)``.

    1 for a single non-zero entry, 0 for a constant-magnitude vector.
    """
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size < 2:
        raise DimensionError("sparseness needs at least two entries")
    l2 = np.linalg.norm(v)
    if l2 == 0:
        raise DomainError("sparseness of the zero vector is undefined")
    rn = np.sqrt(v.size)
    return float((rn - np.abs(v).sum() / l2) / (rn - 1.0))


def factor_sparseness(F):
    """Mean sparseness over the rows of a factor, skipping all-zero rows."""
    F = np.atleast_2d(np.asarray(F, dtype=np.float64))
    vals = [sparseness(row) for row in F if np.any(row)]
    return float(np.mean(vals)) if vals else float("nan")


def relative_error(X, X_hat):
    """``||X - X_hat||_F^2 / ||X||_F^2``."""
    X = np.asarray(X, dtype=np.float64)
    X_hat = np.asarray(X_hat, dtype=np.float64)
    if X.shape != X_hat.shape:
        raise DimensionError(f"shape mismatch {X.shape} vs {X_hat.shape}")
    den = float(np.einsum("ij,ij->", X, X)) if X.ndim == 2 else float(X @ X)
    if den == 0:
        raise DomainError("relative error against a zero matrix is undefined")
    D = X - X_hat
    return float((D * D).sum()) / den
