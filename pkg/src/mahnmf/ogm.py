"""Nesterov smoothing solver.

Each half-step minimizes the smoothed loss over one factor with an optimal
gradient method (two auxiliary sequences: a projected gradient point ``Y``
and a weighted-gradient-history point ``Z``). The outer loop alternates the
two factors with a decaying smoothing parameter ``lambda0 / (t + 1)``.

The W half-step is the H half-step applied to ``(X.T, H, W)``.
"""

import time

import numpy as np

from .config import Box, Elastic, Group, Manifold, Plain, SolverConfig
from .core import FactorPair, as_matrix, check_compose, random_init
from .errors import DimensionError, NumericalFailure
from .prox import clamp_box, ogm_group_steps
from .smoothing import SmoothingState, smoothed_parts
from .trace import ConvergenceTrace


class Hooks:
    """Plain non-negative subproblem; variants override pieces of it."""

    gap_stop = False

    def lipschitz_extra(self, A):
        return 0.0

    def extra(self, A, B, E):
        """Value and gradient of any smooth term added to the loss.

        ``A`` is the fixed factor, ``B`` the free one and ``E = A.T B - X``.
        """
        return 0.0, None

    def penalty(self, B):
        return 0.0

    def feasible(self, B):
        return np.maximum(B, 0.0)

    def steps(self, B, G, G_acc, L, k):
        return np.maximum(B - G / L, 0.0), np.maximum(-G_acc / L, 0.0)


class BoxHooks(Hooks):
    gap_stop = True

    def feasible(self, B):
        return clamp_box(B)

    def steps(self, B, G, G_acc, L, k):
        return clamp_box(B - G / L), clamp_box(-G_acc / L)


class ManifoldHooks(Hooks):
    def __init__(self, beta, laplacian):
        self.beta = float(beta)
        self.laplacian = laplacian
        self._lip = self.beta * float(np.linalg.eigvalsh(laplacian).max()) if self.beta else 0.0

    def lipschitz_extra(self, A):
        return self._lip

    def extra(self, A, B, E):
        if self.beta == 0:
            return 0.0, None
        BL = B @ self.laplacian
        return 0.5 * self.beta * float(np.einsum("ij,ij->", BL, B)), self.beta * BL


class ElasticHooks(Hooks):
    def __init__(self, alpha):
        self.alpha = float(alpha)

    def lipschitz_extra(self, A):
        return self.alpha * float(np.linalg.norm(A @ A.T, 2))

    def extra(self, A, B, E):
        return 0.5 * self.alpha * float(np.einsum("ij,ij->", E, E)), self.alpha * (A @ E)


class GroupHooks(Hooks):
    def __init__(self, groups):
        self.groups = groups

    def penalty(self, B):
        return self.groups.penalty(B)

    def feasible(self, B):
        return self.groups.project(B)

    def steps(self, B, G, G_acc, L, k):
        return ogm_group_steps(G, G_acc, B, L, self.groups, k)


PLAIN_HOOKS = Hooks()


def make_hooks(variant, side):
    """Hooks for the H half-step (``side='H'``) or the W half-step."""
    if isinstance(variant, Plain) or variant is None:
        return PLAIN_HOOKS
    if isinstance(variant, Box):
        return BoxHooks()
    if isinstance(variant, Manifold):
        return ManifoldHooks(variant.beta, variant.laplacian) if side == "H" else PLAIN_HOOKS
    if isinstance(variant, Elastic):
        return ElasticHooks(variant.alpha)
    if isinstance(variant, Group):
        gs = variant.h_groups if side == "H" else variant.w_groups
        return GroupHooks(gs) if gs is not None else PLAIN_HOOKS
    raise TypeError(f"unsupported variant {variant!r}")


def inner_tolerance(t, lambda_t, big_d, n_cols, scale=1.0):
    """Inner precision ``scale * n * D * lambda_t / 2``.

    Any ``scale <= 1`` respects the bound that keeps the outer loop
    descending; ``scale = 1`` is usually so loose that the inner solve stops
    after one or two iterations.
    """
    return scale * n_cols * big_d * lambda_t / 2.0


def monotone_y_step(X, W, Y_prev, H_k, Y_candidate, state):
    """Return whichever of the three candidates has the smallest smoothed loss.

    Ties resolve to the earliest candidate; ``Y_prev`` may be ``None``.
    """
    best, best_val = None, np.inf
    for C in (Y_prev, H_k, Y_candidate):
        if C is None:
            continue
        val, _ = smoothed_parts(W.T @ C - X, state, drop_degenerate=True)
        if val < best_val:
            best, best_val = C, val
    return best


def _evaluate(X, A, B, state, hooks):
    E = A.T @ B - X
    val, U = smoothed_parts(E, state, drop_degenerate=True)
    G = A @ U
    extra_val, extra_grad = hooks.extra(A, B, E)
    if extra_grad is not None:
        G = G + extra_grad
    return val + extra_val + hooks.penalty(B), G, U


def _dual_gap(X, A, Y, U_avg):
    """Duality gap of the box-constrained subproblem at primal point ``Y``."""
    primal = float(np.abs(A.T @ Y - X).sum())
    dual = float(np.minimum(A @ U_avg, 0.0).sum() - np.einsum("ij,ij->", X, U_avg))
    return primal - dual


def ogm_subproblem(X, W, H0, lam, eps, max_inner=500, monotone_y=False, hooks=None,
                   return_info=False, warm_center=True):
    """Approximately minimize the smoothed loss over ``H >= 0`` with ``W`` fixed.

    Stops once two consecutive iterates change the smoothed objective by at
    most ``eps`` or after ``max_inner`` iterations, and returns the iterate
    with the lowest smoothed objective seen (never worse than ``H0``).
    With ``return_info`` the result is ``(H, iterations, smoothed_value)``.

    The gradient-history point ``Z`` is regularized towards ``H0`` by default
    (``warm_center``), which keeps the early iterates near a good warm start;
    with ``warm_center=False`` it is regularized towards 0.
    """
    X, W, H0 = check_compose(X, W, H0)
    hooks = hooks or PLAIN_HOOKS
    state = SmoothingState.from_basis(W, lam)
    H = hooks.feasible(H0)
    f_H, G, U = _evaluate(X, W, H, state, hooks)
    if state.big_d == 0:
        return (H, 0, f_H) if return_info else H
    L = state.lipschitz + hooks.lipschitz_extra(W)
    best, f_best = H, f_H
    center = H
    G_acc = np.zeros_like(H)
    U_acc = np.zeros_like(X) if hooks.gap_stop else None
    Y_prev, f_Yprev = None, np.inf
    k = -1
    for k in range(max_inner):
        G_acc += 0.5 * (k + 1) * G
        Y, Z = hooks.steps(H, G, G_acc - L * center if warm_center else G_acc, L, k)
        if monotone_y:
            f_Y = _evaluate(X, W, Y, state, hooks)[0]
            for C, fc in ((H, f_H), (Y, f_Y)):
                if fc < f_Yprev:
                    Y_prev, f_Yprev = C, fc
            Y = Y_prev
        H_next = (2.0 / (k + 3)) * Z + ((k + 1.0) / (k + 3)) * Y
        if not np.all(np.isfinite(H_next)):
            raise NumericalFailure(f"non-finite iterate at inner iteration {k}", iteration=k)
        f_next, G_next, U_next = _evaluate(X, W, H_next, state, hooks)
        if not np.isfinite(f_next):
            raise NumericalFailure(f"non-finite objective at inner iteration {k}", iteration=k)
        if f_next < f_best:
            best, f_best = H_next, f_next
        done = abs(f_H - f_next) <= eps
        if hooks.gap_stop and not done:
            U_acc += (k + 1) * U
            U_avg = U_acc * (2.0 / ((k + 1) * (k + 2)))
            done = _dual_gap(X, W, Y, U_avg) <= eps
        H, f_H, G, U = H_next, f_next, G_next, U_next
        if done:
            break
    return (best, k + 1, f_best) if return_info else best


def variant_objective(X, W, H, variant=None):
    """Unsmoothed objective of the chosen variant (Manhattan loss plus terms)."""
    R = X - W.T @ H
    f = float(np.abs(R).sum())
    if isinstance(variant, Manifold) and variant.beta:
        f += 0.5 * variant.beta * float(np.einsum("ij,ij->", H @ variant.laplacian, H))
    elif isinstance(variant, Elastic):
        f += 0.5 * variant.alpha * float(np.einsum("ij,ij->", R, R))
    elif isinstance(variant, Group):
        if variant.h_groups is not None:
            f += variant.h_groups.penalty(H)
        if variant.w_groups is not None:
            f += variant.w_groups.penalty(W)
    return f


def _smoothed_total(X, W, H, lam, variant):
    hooks_h = make_hooks(variant, "H")
    state = SmoothingState.from_basis(W, lam)
    val, _, _ = _evaluate(X, W, H, state, hooks_h)
    if isinstance(variant, Group) and variant.w_groups is not None:
        val += variant.w_groups.penalty(W)
    return val


def prepare_init(X, cfg, init=None):
    """Seeded default start, made feasible for the configured variant."""
    m, n = X.shape
    F = init if init is not None else random_init(X, cfg.rank, cfg.seed)
    W, H = np.array(F.W, dtype=np.float64), np.array(F.H, dtype=np.float64)
    if W.shape != (cfg.rank, m) or H.shape != (cfg.rank, n):
        raise DimensionError(f"init shapes W{W.shape}, H{H.shape} do not match X{X.shape}, r={cfg.rank}")
    v = cfg.variant
    if isinstance(v, Manifold) and v.laplacian.shape != (n, n):
        raise DimensionError(f"laplacian must be {n}x{n}")
    if isinstance(v, Group):
        if v.h_groups is not None:
            v.h_groups.check_columns(n)
            v.h_groups.resolve(H)
        if v.w_groups is not None:
            v.w_groups.check_columns(m)
            v.w_groups.resolve(W)
    W = make_hooks(v, "W").feasible(W)
    H = make_hooks(v, "H").feasible(H)
    return W, H


def solve(X, cfg, init=None):
    """Alternate smoothed H and W half-steps until the objective settles.

    A half-step whose result would raise the unsmoothed objective is
    discarded, so the recorded objective never increases.
    Returns ``(FactorPair, ConvergenceTrace)``.
    """
    X = as_matrix(X, "X", nonneg=True)
    if X.size == 0:
        raise DimensionError("X is empty")
    if not isinstance(cfg, SolverConfig):
        raise TypeError("cfg must be a SolverConfig")
    m, n = X.shape
    W, H = prepare_init(X, cfg, init)
    variant = cfg.variant
    hooks_h = make_hooks(variant, "H")
    hooks_w = make_hooks(variant, "W")
    Xt = X.T
    f = variant_objective(X, W, H, variant)
    trace = ConvergenceTrace(initial_objective=f)
    if not X.any():
        trace.append(0, cfg.lambda0, f, f, 0, 0, 0.0)
        return FactorPair(W, H), trace
    try:
        for t in range(cfg.max_outer):
            t0 = time.perf_counter()
            lam = cfg.lambda0 / (t + 1)
            f_prev = f

            eps = cfg.inner_tol
            if cfg.adaptive:
                d_w = float(np.sqrt(np.einsum("ij,ij->j", W, W)).sum())
                eps = max(inner_tolerance(t, lam, d_w, n, cfg.inner_tol_scale), cfg.inner_tol_floor)
            H_new, it_h, _ = ogm_subproblem(X, W, H, lam, eps, cfg.max_inner, cfg.monotone_y,
                                            hooks_h, return_info=True, warm_center=cfg.warm_center)
            f_new = variant_objective(X, W, H_new, variant)
            if f_new <= f:
                H, f = H_new, f_new

            eps = cfg.inner_tol
            if cfg.adaptive:
                d_h = float(np.sqrt(np.einsum("ij,ij->j", H, H)).sum())
                eps = max(inner_tolerance(t, lam, d_h, m, cfg.inner_tol_scale), cfg.inner_tol_floor)
            W_new, it_w, _ = ogm_subproblem(Xt, H, W, lam, eps, cfg.max_inner, cfg.monotone_y,
                                            hooks_w, return_info=True, warm_center=cfg.warm_center)
            f_new = variant_objective(X, W_new, H, variant)
            if f_new <= f:
                W, f = W_new, f_new

            smoothed = _smoothed_total(X, W, H, lam, variant)
            trace.append(t, lam, f, smoothed, it_h, it_w, time.perf_counter() - t0)
            if abs(f_prev - f) <= cfg.outer_tol:
                break
    except NumericalFailure as exc:
        exc.trace = trace
        raise
    return FactorPair(W, H), trace
