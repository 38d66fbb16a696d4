"""Euclidean NMF by multiplicative updates, used as a comparison baseline."""

import numpy as np

from ..core import FactorPair, as_matrix, random_init

EPS = 1e-12


def eucnmf_baseline(X, r, max_iter=2000, tol=1e-8, seed=0, init=None, return_trace=False):
    """Minimize ``||X - W^T H||_F^2`` with multiplicative updates.

    ``W`` is ``r x m`` and ``H`` is ``r x n`` as elsewhere in the package.
    Stops when the relative decrease of the objective falls below ``tol``.
    With ``return_trace`` also returns the list of objectives (initial first).
    """
    X = as_matrix(X, "X", nonneg=True)
    F = init if init is not None else random_init(X, r, seed)
    W, H = F.W.copy(), F.H.copy()
    obj = [float(((X - W.T @ H) ** 2).sum())]
    for _ in range(max_iter):
        H *= (W @ X) / (W @ W.T @ H + EPS)
        W *= (H @ X.T) / (H @ H.T @ W + EPS)
        obj.append(float(((X - W.T @ H) ** 2).sum()))
        if obj[-2] - obj[-1] <= tol * max(obj[-2], EPS):
            break
    res = FactorPair(W, H)
    return (res, obj) if return_trace else res
