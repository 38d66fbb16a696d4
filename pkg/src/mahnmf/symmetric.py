"""Symmetric factorization ``X ~ H H^T`` under the Manhattan loss."""

import time

import numpy as np

from .core import INIT_FLOOR, as_matrix
from .errors import DimensionError, DomainError
from .rri import pwl_plus_quadratic_min
from .trace import ConvergenceTrace

SYMMETRY_RTOL = 1e-9


def sym_coordinate_objective(z_diag, a, z_off, h):
    """``|z_diag - h^2| + 2 sum_i |z_off_i - a_i h|`` evaluated at each ``h``.

    This is the part of ``||Z - h_c h_c^T||_M`` that depends on ``h = H[j, c]``;
    off-diagonal entries count twice because ``(i, j)`` and ``(j, i)`` coincide.
    """
    h = np.asarray(h, dtype=np.float64)
    off = np.abs(z_off[:, None] - np.outer(a, h.ravel())).sum(axis=0)
    return (np.abs(z_diag - h.ravel() ** 2) + 2.0 * off).reshape(h.shape)


def sym_coordinate_min(z_diag, a, z_off):
    """Exact minimizer of the coordinate objective over ``h >= 0``.

    For ``h^2 >= z_diag`` the objective is convex (quadratic plus weighted
    absolute values) and has a closed form. Below ``sqrt(z_diag)`` it is
    concave between breakpoints, so the minimum is attained at 0, at
    ``sqrt(z_diag)`` or at a breakpoint inside that interval.
    """
    a = np.asarray(a, dtype=np.float64)
    z_off = np.asarray(z_off, dtype=np.float64)
    pos = a > 0
    xb = z_off[pos] / a[pos]
    wts = 2.0 * a[pos]
    root = np.sqrt(max(z_diag, 0.0))
    cands = [max(root, pwl_plus_quadratic_min(wts, xb, 1.0, 0.0))]
    if z_diag > 0:
        inside = xb[(xb > 0) & (xb < root)]
        cands.extend([0.0, root])
        cands.extend(inside.tolist())
    cands = np.array(sorted(set(cands)))
    vals = sym_coordinate_objective(z_diag, a, z_off, cands)
    return float(cands[int(np.argmin(vals))])


def _check_symmetric(X):
    scale = float(np.abs(X).max()) if X.size else 0.0
    if np.abs(X - X.T).max(initial=0.0) > SYMMETRY_RTOL * max(scale, 1.0):
        raise DomainError("X is not symmetric")


def sym_init(X, r, seed=0, floor=INIT_FLOOR):
    """Seeded uniform start scaled so that ``mean(H H^T)`` matches ``mean(X)``."""
    n = X.shape[0]
    rng = np.random.default_rng(seed)
    H = 1.0 - rng.random((n, r))
    approx = float((H @ H.T).mean())
    target = float(X.mean())
    H *= np.sqrt(target / approx) if target > 0 else 0.0
    return np.maximum(H, floor)


def sym_solve(X, r, cfg=None, init=None, tol=None, max_sweeps=None, seed=None):
    """Coordinate descent for ``min_{H >= 0} ||X - H H^T||_M``.

    ``X`` is scaled by its largest entry before solving and ``H`` is scaled
    back afterwards. ``cfg`` (a SolverConfig) supplies the tolerance, sweep cap
    and seed unless given explicitly. Returns ``(H, ConvergenceTrace)``; the
    trace objective is measured on the original scale.
    """
    X = as_matrix(X, "X", nonneg=True)
    if X.shape[0] != X.shape[1]:
        raise DimensionError(f"X must be square, got {X.shape}")
    _check_symmetric(X)
    r = int(r)
    if r < 1:
        raise DimensionError("rank must be >= 1")
    tol = tol if tol is not None else (cfg.outer_tol if cfg is not None else 1e-6)
    max_sweeps = max_sweeps or (cfg.max_outer if cfg is not None else 200)
    seed = seed if seed is not None else (cfg.seed if cfg is not None else 0)

    X = 0.5 * (X + X.T)
    scale = float(X.max())
    n = X.shape[0]
    if scale == 0:
        H = np.zeros((n, r))
        trace = ConvergenceTrace(initial_objective=0.0)
        trace.append(0, np.nan, 0.0, np.nan, 0, 0, 0.0)
        return H, trace
    Xs = X / scale
    if init is None:
        H = sym_init(Xs, r, seed)
    else:
        H = np.array(init, dtype=np.float64) / np.sqrt(scale)
        if H.shape != (n, r):
            raise DimensionError(f"init must be {n}x{r}")
        if np.any(H < 0):
            raise DomainError("init must be non-negative")
    R = Xs - H @ H.T
    f = float(np.abs(R).sum())
    trace = ConvergenceTrace(initial_objective=f * scale)
    idx = np.arange(n)
    for t in range(max_sweeps):
        t0 = time.perf_counter()
        f_prev = f
        for c in range(r):
            Z = R + np.outer(H[:, c], H[:, c])
            for j in range(n):
                others = idx != j
                a, z_off = H[others, c], Z[others, j]
                h = sym_coordinate_min(Z[j, j], a, z_off)
                old = sym_coordinate_objective(Z[j, j], a, z_off, H[j, c])
                if sym_coordinate_objective(Z[j, j], a, z_off, h) <= old:
                    H[j, c] = h
            R = Z - np.outer(H[:, c], H[:, c])
        f = float(np.abs(Xs - H @ H.T).sum())
        trace.append(t, np.nan, f * scale, np.nan, r, 0, time.perf_counter() - t0)
        if abs(f_prev - f) * scale <= tol:
            break
    return H * np.sqrt(scale), trace
