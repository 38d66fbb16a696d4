"""Huber-type smoothing of the Manhattan loss.

For a basis ``W`` (r x m) every row ``i`` of the residual ``E = W.T H - X``
carries a dual weight ``q_i = ||W[:, i]||_2``. The smoothed loss is

    f_lam(W, H) = sum_ij q_i * psi_lam(|E_ij| / q_i)

with ``psi_lam`` quadratic below ``lam`` and linear above. It under-estimates
the Manhattan loss by at most ``n * D * lam / 2`` where ``D = sum_i q_i``,
and its gradient ``W @ U`` (``U`` the clamped dual matrix) is Lipschitz with
constant at most ``D / lam``.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .core import as_matrix, check_compose, column_l2_norms
from .errors import DegenerateBasisError, DegenerateBasisWarning, DimensionError, DomainError


@dataclass(frozen=True)
class SmoothingState:
    lam: float
    dual_weights: np.ndarray

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError(f"smoothing parameter must be positive, got {self.lam}")
        q = np.asarray(self.dual_weights, dtype=np.float64).ravel()
        if q.size and q.min() < 0:
            raise DomainError("dual weights must be non-negative")
        object.__setattr__(self, "dual_weights", q)

    @classmethod
    def from_basis(cls, W, lam):
        return cls(float(lam), column_l2_norms(W))

    @property
    def big_d(self):
        return float(self.dual_weights.sum())

    @property
    def lipschitz(self):
        # Upper bound on ||W^T||_{1,2}^2 / lam; the operator norm has no closed form.
        return self.big_d / self.lam

    @property
    def degenerate(self):
        return self.dual_weights == 0


def psi(tau, lam):
    """Scalar smoothing ``tau**2/(2 lam)`` for ``tau <= lam``, else ``tau - lam/2``."""
    if not lam > 0:
        raise DomainError(f"lam must be positive, got {lam}")
    t = np.asarray(tau, dtype=np.float64)
    if np.any(t < 0):
        raise DomainError("psi is defined for tau >= 0 only")
    out = np.where(t <= lam, t * t / (2.0 * lam), t - 0.5 * lam)
    return float(out) if out.ndim == 0 else out


def sandwich_gap(state, num_columns):
    """Largest possible excess ``f - f_lam`` over ``num_columns`` columns."""
    return num_columns * state.big_d * state.lam / 2.0


def _check_state(E, state):
    if E.shape[0] != state.dual_weights.shape[0]:
        raise DimensionError(
            f"residual has {E.shape[0]} rows but state carries "
            f"{state.dual_weights.shape[0]} dual weights"
        )


def dual_solution(residual, state):
    """Maximizer ``U = clip(E / (lam q), -1, 1)`` of the smoothed dual.

    Raises :class:`DegenerateBasisError` when any dual weight is zero.
    """
    E = as_matrix(residual, "residual")
    _check_state(E, state)
    if np.any(state.degenerate):
        raise DegenerateBasisError(
            f"{int(state.degenerate.sum())} zero dual weight(s); the basis has all-zero columns"
        )
    scale = state.lam * state.dual_weights
    return np.clip(E / scale[:, None], -1.0, 1.0)


def smoothed_parts(E, state, drop_degenerate=False):
    """Fused value and dual matrix for residual ``E = W.T H - X``.

    Rows with zero dual weight cannot be moved by any ``H``. With
    ``drop_degenerate`` they contribute their limiting value ``|E_ij|`` and a
    zero dual entry; otherwise :class:`DegenerateBasisError` is raised.
    """
    _check_state(E, state)
    q = state.dual_weights
    bad = q == 0
    if bad.any():
        if not drop_degenerate:
            raise DegenerateBasisError(
                f"{int(bad.sum())} zero dual weight(s); the basis has all-zero columns"
            )
        warnings.warn(
            f"{int(bad.sum())} basis column(s) are all zero; their rows are dropped "
            "from the smoothed sum",
            DegenerateBasisWarning,
            stacklevel=3,
        )
    thr = state.lam * q
    safe = np.where(bad, 1.0, thr)[:, None]
    A = np.abs(E)
    quad = A <= thr[:, None]
    vals = np.where(quad, A * A / (2.0 * safe), A - 0.5 * thr[:, None])
    U = np.clip(E / safe, -1.0, 1.0)
    if bad.any():
        vals[bad] = A[bad]
        U[bad] = 0.0
    return float(vals.sum()), U


def smoothed_objective(X, W, H, state, drop_degenerate=False):
    X, W, H = check_compose(X, W, H)
    value, _ = smoothed_parts(W.T @ H - X, state, drop_degenerate)
    return value


def smoothed_gradient(X, W, H, state, drop_degenerate=False):
    """Gradient ``W @ U`` of the smoothed objective with respect to ``H``."""
    X, W, H = check_compose(X, W, H)
    _, U = smoothed_parts(W.T @ H - X, state, drop_degenerate)
    return W @ U


def smoothed_value_and_gradient(X, W, H, state, drop_degenerate=False):
    X, W, H = check_compose(X, W, H)
    value, U = smoothed_parts(W.T @ H - X, state, drop_degenerate)
    return value, W @ U
