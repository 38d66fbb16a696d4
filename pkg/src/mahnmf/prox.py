"""Projections and proximity operators for the structured variants.

A block ``M`` here is any 2-D array whose *columns* are the sparsity units:
``||M||_{1,p} = sum_j ||M[:, j]||_p`` with ``p`` in {2, inf}. The solvers
pass ``H[:, group].T`` so each latent component restricted to a group is one
unit.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError

INF = np.inf
_BISECT_ITERS = 200


def _check_p(p):
    if p in (2, "2"):
        return 2
    if p in (INF, "inf", "infinity", "Inf"):
        return INF
    raise DomainError(f"p must be 2 or inf, got {p!r}")


def clamp_box(V):
    """Entry-wise median of 0, 1 and ``V``."""
    return np.clip(np.asarray(V, dtype=np.float64), 0.0, 1.0)


def l1p_norm(M, p):
    p = _check_p(p)
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, ord=p, axis=0).sum())


def _simplex_threshold(S, radius):
    """Column-wise threshold ``t`` solving ``sum_i max(0, S_ij - t) = radius``.

    ``S`` holds non-negative values; the threshold is ``max_k (C_k - radius)/k``
    over the descending cumulative sums ``C_k`` of each column.
    """
    srt = -np.sort(-S, axis=0)
    csum = np.cumsum(srt, axis=0)
    k = np.arange(1, S.shape[0] + 1, dtype=np.float64)[:, None]
    return ((csum - radius) / k).max(axis=0)


def project_l1_ball(v, radius):
    """Euclidean projection of ``v`` onto ``{x : ||x||_1 <= radius}``."""
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    v = np.asarray(v, dtype=np.float64)
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    theta = _simplex_threshold(a.reshape(-1, 1), radius)[0]
    return np.sign(v) * np.maximum(a - theta, 0.0)


def _bisect_decreasing(fn, lo, hi, tol=1e-12):
    """Smallest-bracket root of a non-increasing ``fn``; returns the upper end."""
    for _ in range(_BISECT_ITERS):
        if hi - lo <= tol * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if fn(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi


def project_l1p_ball(M, radius, p):
    """Project a block onto ``{X >= 0, ||X||_{1,p} <= radius}``.

    Negative entries are clamped first; the non-negative projection then
    reduces to one scalar multiplier ``theta`` found by bisection. Returning
    the upper end of the final bracket keeps the result feasible.
    """
    p = _check_p(p)
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    V = np.maximum(np.atleast_2d(np.asarray(M, dtype=np.float64)), 0.0)
    if V.size == 0 or l1p_norm(V, p) <= radius:
        return V
    if p == 2:
        norms = np.linalg.norm(V, axis=0)
        theta = _bisect_decreasing(
            lambda t: np.maximum(norms - t, 0.0).sum() - radius, 0.0, float(norms.max())
        )
        shrunk = np.maximum(norms - theta, 0.0)
        scale = np.divide(shrunk, norms, out=np.zeros_like(norms), where=norms > 0)
        return V * scale
    # p = inf: column caps mu_j(theta) with sum_i max(0, V_ij - mu_j) = theta
    srt = -np.sort(-V, axis=0)
    csum = np.cumsum(srt, axis=0)
    k = np.arange(1, V.shape[0] + 1, dtype=np.float64)[:, None]

    def caps(theta):
        return np.maximum(((csum - theta) / k).max(axis=0), 0.0)

    theta = _bisect_decreasing(
        lambda t: caps(t).sum() - radius, 0.0, float(csum[-1].max())
    )
    return np.minimum(V, caps(theta))


def prox_l1p(M, weight, p):
    """Proximity operator of ``weight * ||.||_{1,p}`` applied to ``M``.

    For ``p = 2`` every column is shrunk toward zero by ``weight`` in norm.
    For ``p = inf`` each column is reduced by its projection onto the l1 ball
    of radius ``weight`` (Moreau decomposition).
    """
    p = _check_p(p)
    if weight < 0:
        raise DomainError(f"weight must be non-negative, got {weight}")
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    if weight == 0 or M.size == 0:
        return M.copy()
    if p == 2:
        norms = np.linalg.norm(M, axis=0)
        scale = np.divide(
            np.maximum(norms - weight, 0.0), norms, out=np.zeros_like(norms), where=norms > 0
        )
        return M * scale
    A = np.abs(M)
    out = M.copy()
    big = A.sum(axis=0) > weight
    if big.any():
        theta = _simplex_threshold(A[:, big], weight)
        proj = np.sign(M[:, big]) * np.maximum(A[:, big] - theta, 0.0)
        out[:, big] = M[:, big] - proj
    out[:, ~big] = 0.0
    return out


@dataclass
class GroupStructure:
    """Disjoint column groups of one factor with a shared ``l_{1,p}`` rule.

    ``mode`` is ``"constrained"`` (per-group radius) or ``"penalized"``
    (weight ``eta``). A ``radius`` of ``None`` is resolved at solve time to
    ``radius_fraction`` of the initial group norm.
    """

    groups: list
    p: object = 2
    mode: str = "constrained"
    radius: object = None
    eta: float = 0.0
    radius_fraction: float = 0.01
    _radii: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.p = _check_p(self.p)
        self.groups = [np.asarray(g, dtype=np.intp).ravel() for g in self.groups]
        seen = set()
        for g in self.groups:
            if g.size == 0:
                raise ConfigError("empty group")
            s = set(g.tolist())
            if len(s) != g.size or seen & s:
                raise ConfigError("groups must be pairwise disjoint")
            seen |= s
        if self.mode not in ("constrained", "penalized"):
            raise ConfigError(f"unknown group mode {self.mode!r}")
        if self.mode == "penalized" and self.eta < 0:
            raise ConfigError("eta must be non-negative")
        if self.mode == "constrained":
            if self.radius is not None:
                radii = np.broadcast_to(
                    np.asarray(self.radius, dtype=np.float64), (len(self.groups),)
                ).copy()
                if np.any(radii <= 0):
                    raise ConfigError("group radii must be positive")
                self._radii = radii
            elif not self.radius_fraction > 0:
                raise ConfigError("radius_fraction must be positive")

    def check_columns(self, ncols):
        for g in self.groups:
            if g.min() < 0 or g.max() >= ncols:
                raise ConfigError(f"group index out of range for {ncols} columns")

    def norms(self, F):
        """Per-group ``||F[:, g].T||_{1,p}`` for a factor ``F`` (r x cols)."""
        return np.array([l1p_norm(F[:, g].T, self.p) for g in self.groups])

    def resolve(self, F):
        """Fix the radii from the initial factor when not given explicitly."""
        if self.mode == "constrained" and self._radii is None:
            base = self.norms(F)
            self._radii = np.where(base > 0, self.radius_fraction * base, self.radius_fraction)
        return self

    @property
    def radii(self):
        return self._radii

    def penalty(self, F):
        if self.mode != "penalized":
            return 0.0
        return float(self.eta * self.norms(F).sum())

    def project(self, V):
        """Non-negative projection followed by per-group ball projection."""
        out = np.maximum(V, 0.0)
        if self.mode == "constrained":
            for g, rad in zip(self.groups, self._radii):
                out[:, g] = project_l1p_ball(out[:, g].T, rad, self.p).T
        return out

    def prox(self, V, weight):
        out = np.maximum(V, 0.0)
        if self.mode == "penalized" and weight > 0:
            for g in self.groups:
                out[:, g] = prox_l1p(out[:, g].T, weight, self.p).T
        return out


def ogm_group_steps(grad, grad_acc, H, lipschitz, groups, k):
    """Y and Z iterates of the accelerated method under group structure.

    ``grad`` is the gradient at ``H``; ``grad_acc`` is the running sum
    ``sum_{i<=k} (i+1)/2 * grad_i``. Constrained groups project both points
    onto their balls; penalized groups apply the prox with weights
    ``eta/L`` (Y) and ``eta (k+1)(k+2) / (4L)`` (Z).
    """
    Y_raw = H - grad / lipschitz
    Z_raw = -grad_acc / lipschitz
    if groups.mode == "constrained":
        return groups.project(Y_raw), groups.project(Z_raw)
    wy = groups.eta / lipschitz
    wz = groups.eta * (k + 1) * (k + 2) / (4.0 * lipschitz)
    return groups.prox(Y_raw, wy), groups.prox(Z_raw, wz)
