"""Rank-one residual iteration.

Every entry ``H[l, j]`` is updated in closed form: with the residual
``Z = X - sum_{i != l} W[i].T H[i]`` fixed, the coordinate objective
``sum_i |Z_ij - W_li h|`` is piecewise linear in ``h`` with breakpoints
``Z_ij / W_li`` and slopes increasing by ``2 W_li`` at each one. The minimizer
is the first breakpoint where the slope turns non-negative (the leftmost one
when the slope is exactly zero), clamped to the feasible interval.
"""

import time

import numpy as np

from .config import Box, Manifold, Plain, SolverConfig
from .core import FactorPair, as_matrix, check_compose
from .errors import ConfigError, DimensionError, DomainError
from .ogm import prepare_init, variant_objective
from .trace import ConvergenceTrace

_SLOPE_RTOL = 1e-12


def _breakpoint_scan(Z, w, lower=0.0, upper=np.inf):
    """Column-wise minimizer of ``sum_i |Z_ij - w_i h|`` over ``[lower, upper]``.

    Returns ``None`` when ``w`` has no positive entry. Duplicate breakpoints
    need no merging: the slope after a run of equal points is the same
    whichever of them the scan stops on.
    """
    pos = w > 0
    if not pos.any():
        return None
    wp = w[pos]
    P = Z[pos] / wp[:, None]
    order = np.argsort(P, axis=0, kind="stable")
    Ps = np.take_along_axis(P, order, axis=0)
    total = wp.sum()
    slope = 2.0 * np.cumsum(wp[order], axis=0) - total
    first = np.argmax(slope >= -_SLOPE_RTOL * total, axis=0)
    h = Ps[first, np.arange(Z.shape[1])]
    return np.clip(h, lower, upper)


def weighted_l1_min(weights, targets):
    """Minimize ``sum_i |w_i x - z_i|`` over ``x >= 0``.

    Zero weights are ignored. Returns ``None`` when no weight is positive,
    signalling that the coordinate is unconstrained by the data.
    """
    w = np.asarray(weights, dtype=np.float64).ravel()
    z = np.asarray(targets, dtype=np.float64).ravel()
    if w.shape != z.shape:
        raise DimensionError("weights and targets differ in length")
    if np.any(w < 0):
        raise DomainError("weights must be non-negative")
    h = _breakpoint_scan(z[:, None], w)
    return None if h is None else float(h[0])


def pwl_plus_quadratic_min(a, x_breaks, b, d):
    """Unique minimizer of ``sum_i a_i |x - x_i| + b (x - d)**2``.

    Duplicate breakpoints are merged by summing their weights. Starting from
    slope offset ``k_1 = -sum a`` the offset grows by ``2 a_i`` past each
    breakpoint; the minimizer sits on the first segment whose right end has
    positive derivative, at ``max(x_i, d - k_{i+1} / (2b))``.
    """
    if not b > 0:
        raise DomainError(f"quadratic weight b must be positive, got {b}")
    a = np.asarray(a, dtype=np.float64).ravel()
    xb = np.asarray(x_breaks, dtype=np.float64).ravel()
    if a.shape != xb.shape:
        raise DimensionError("a and x_breaks differ in length")
    if a.size == 0:
        return float(d)
    if np.any(a <= 0):
        raise DomainError("a must be strictly positive")
    xs, inv = np.unique(xb, return_inverse=True)
    am = np.zeros_like(xs)
    np.add.at(am, inv, a)
    return _pwq_sorted(am, xs, b, d)


def _pwq_sorted(a, xs, b, d):
    k = -a.sum() + 2.0 * np.concatenate(([0.0], np.cumsum(a)))
    right = np.concatenate((xs, [np.inf]))
    i = int(np.argmax(2.0 * b * (right - d) + k > 0))
    vertex = d - k[i] / (2.0 * b)
    return float(vertex if i == 0 else max(xs[i - 1], vertex))


def _sweep(X, W, H, R, upper):
    for l in range(W.shape[0]):
        Z = R + np.outer(W[l], H[l])
        h = _breakpoint_scan(Z, W[l], 0.0, upper)
        if h is not None:
            H[l] = h
        R = Z - np.outer(W[l], H[l])
    return R


def rri_update_H(X, W, H, inner_tol=0.1, max_sweeps=500, box=False, return_info=False):
    """Cyclic closed-form row updates of ``H`` until the loss settles.

    Sweeps stop once ``|f(W, H_{k+1}) - f(W, H_k)| <= inner_tol``. With
    ``box`` every coordinate is clipped to [0, 1] instead of [0, inf).
    """
    X, W, H = check_compose(X, W, H)
    H = H.copy()
    upper = 1.0 if box else np.inf
    R = X - W.T @ H
    f = float(np.abs(R).sum())
    k = 0
    for k in range(1, max_sweeps + 1):
        R = _sweep(X, W, H, R, upper)
        f_new = float(np.abs(R).sum())
        done = abs(f - f_new) <= inner_tol
        f = f_new
        if done:
            break
    return (H, k, f) if return_info else H


def rri_box_update(X, W, H, inner_tol=0.1, max_sweeps=500, return_info=False):
    """Box-constrained variant: every coordinate is ``med(0, 1, p)``."""
    return rri_update_H(X, W, H, inner_tol, max_sweeps, box=True, return_info=return_info)


def _manifold_objective(R, H, beta, S):
    # beta/2 tr(H L H^T) = beta/4 sum_{a,j} S_aj ||H[:, a] - H[:, j]||^2
    sq = np.einsum("ij,ij->j", H, H)
    dist = sq[:, None] + sq[None, :] - 2.0 * (H.T @ H)
    return float(np.abs(R).sum()) + 0.25 * beta * float((S * dist).sum())


def rri_manifold_update(X, W, H, beta, similarity, inner_tol=0.1, max_sweeps=500,
                        return_info=False):
    """Coordinate-wise exact minimization with a graph smoothness term.

    The coordinate problem adds ``beta/2 sum_{a != j} S_aj (H_la - h)^2`` to
    the piecewise-linear loss. Coordinates of one row are coupled through
    ``S`` and are visited strictly in order.
    """
    X, W, H = check_compose(X, W, H)
    S = np.asarray(similarity, dtype=np.float64)
    n = X.shape[1]
    if S.shape != (n, n):
        raise DimensionError(f"similarity must be {n}x{n}")
    if beta < 0:
        raise DomainError("beta must be non-negative")
    S = S - np.diag(np.diag(S))
    H = H.copy()
    R = X - W.T @ H
    f = _manifold_objective(R, H, beta, S)
    s_tot = S.sum(axis=0)
    k = 0
    for k in range(1, max_sweeps + 1):
        for l in range(W.shape[0]):
            w = W[l]
            Z = R + np.outer(w, H[l])
            pos = w > 0
            if not pos.any():
                continue
            wp = w[pos]
            P = Z[pos] / wp[:, None]
            order = np.argsort(P, axis=0, kind="stable")
            Ps = np.take_along_axis(P, order, axis=0)
            Ws = wp[order]
            base = _breakpoint_scan(Z, w)
            for j in range(n):
                b = 0.5 * beta * s_tot[j]
                if b > 0:
                    d = float(S[:, j] @ H[l]) / s_tot[j]
                    x = _pwq_sorted(Ws[:, j], Ps[:, j], b, d)
                    H[l, j] = max(0.0, x)
                else:
                    H[l, j] = base[j]
            R = Z - np.outer(w, H[l])
        f_new = _manifold_objective(R, H, beta, S)
        done = abs(f - f_new) <= inner_tol
        f = f_new
        if done:
            break
    return (H, k, f) if return_info else H


def rri_solve(X, cfg, init=None):
    """Alternating RRI half-steps with warm starts.

    Supports the plain, box and manifold variants; the manifold term only
    touches ``H``. Returns ``(FactorPair, ConvergenceTrace)`` with the same
    record schema as the smoothing solver (lambda and smoothed columns NaN).
    """
    X = as_matrix(X, "X", nonneg=True)
    if X.size == 0:
        raise DimensionError("X is empty")
    if not isinstance(cfg, SolverConfig):
        raise TypeError("cfg must be a SolverConfig")
    v = cfg.variant
    if not isinstance(v, (Plain, Box, Manifold)):
        raise ConfigError(f"RRI does not support the {v.name} variant; use the smoothing solver")
    W, H = prepare_init(X, cfg, init)
    eps = cfg.outer_tol if cfg.adaptive else cfg.inner_tol
    box = isinstance(v, Box)
    Xt = X.T
    f = variant_objective(X, W, H, v)
    trace = ConvergenceTrace(initial_objective=f)
    for t in range(cfg.max_outer):
        t0 = time.perf_counter()
        f_prev = f
        if isinstance(v, Manifold):
            H, it_h, _ = rri_manifold_update(X, W, H, v.beta, v.similarity, eps,
                                             cfg.max_inner, return_info=True)
        else:
            H, it_h, _ = rri_update_H(X, W, H, eps, cfg.max_inner, box, return_info=True)
        W, it_w, _ = rri_update_H(Xt, H, W, eps, cfg.max_inner, box, return_info=True)
        f = variant_objective(X, W, H, v)
        trace.append(t, np.nan, f, np.nan, it_h, it_w, time.perf_counter() - t0)
        if abs(f_prev - f) <= cfg.outer_tol:
            break
    return FactorPair(W, H), trace
