"""Similarity graphs and Laplacians."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ..errors import ConfigError, DomainError


@dataclass(frozen=True)
class GraphSpec:
    """``mode='knn'`` uses ``k`` and ``width`` (None: median pairwise distance);
    ``mode='image'`` uses ``delta_f``, ``delta_l`` and ``r_cutoff``
    (None: median normalized pixel distance)."""

    mode: str = "knn"
    k: int = 5
    width: float = None
    delta_f: float = 0.3
    delta_l: float = 0.7
    r_cutoff: float = None

    def __post_init__(self):
        if self.mode not in ("knn", "image"):
            raise ConfigError(f"unknown graph mode {self.mode!r}")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        for name in ("width", "r_cutoff"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise ConfigError(f"{name} must be positive")
        if not (self.delta_f > 0 and self.delta_l > 0):
            raise ConfigError("delta_f and delta_l must be positive")


def knn_laplacian(X, spec=None):
    """kNN graph over the columns of ``X`` with a Gaussian kernel.

    ``S_ij = exp(-d_ij^2 / width^2)`` when ``j`` is among the ``k`` nearest
    neighbours of ``i`` or vice versa (symmetrized by max). Returns ``(S, L)``
    with ``L = diag(S 1) - S``.
    """
    spec = spec or GraphSpec()
    P = np.asarray(X, dtype=np.float64).T
    n = P.shape[0]
    if spec.k >= n:
        raise DomainError(f"k = {spec.k} must be smaller than the number of points {n}")
    dist = pdist(P)
    width = spec.width
    if width is None:
        width = float(np.median(dist)) if dist.size else 1.0
        width = width if width > 0 else 1.0
    D = squareform(dist)
    np.fill_diagonal(D, np.inf)
    nbr = np.argsort(D, axis=1, kind="stable")[:, :spec.k]
    mask = np.zeros((n, n), dtype=bool)
    mask[np.repeat(np.arange(n), spec.k), nbr.ravel()] = True
    np.fill_diagonal(D, 0.0)
    S = np.where(mask, np.exp(-(D / width) ** 2), 0.0)
    S = np.maximum(S, S.T)
    np.fill_diagonal(S, 0.0)
    L = np.diag(S.sum(axis=1)) - S
    return S, L


def image_similarity(brightness, spec=None):
    """Pixel affinity from brightness and position differences.

    ``w_ij = exp(-dF^2 / delta_f^2) * exp(-dL^2 / delta_l^2)`` when
    ``dL <= r`` and 0 otherwise; ``dF`` (brightness) and ``dL`` (pixel
    distance) are both scaled to [0, 1]. Pixels are taken in row-major order.
    """
    spec = spec or GraphSpec(mode="image")
    B = np.asarray(brightness, dtype=np.float64)
    if B.ndim != 2 or B.size == 0:
        raise DomainError("brightness must be a non-empty 2-D image")
    h, w = B.shape
    rows, cols = np.divmod(np.arange(h * w), w)
    coords = np.column_stack((rows, cols)).astype(np.float64)
    dF = np.abs(B.ravel()[:, None] - B.ravel()[None, :])
    dL = squareform(pdist(coords))
    if dF.max() > 0:
        dF /= dF.max()
    if dL.max() > 0:
        dL /= dL.max()
    r = spec.r_cutoff
    if r is None:
        r = float(np.median(dL[np.triu_indices(h * w, 1)])) if h * w > 1 else 0.0
    Wm = np.exp(-(dF / spec.delta_f) ** 2) * np.exp(-(dL / spec.delta_l) ** 2)
    Wm[dL > r] = 0.0
    return 0.5 * (Wm + Wm.T)


def normalize_similarity(Wm):
    """``D^{-1/2} W D^{-1/2}`` with ``D`` the degree matrix; isolated nodes stay 0."""
    Wm = np.asarray(Wm, dtype=np.float64)
    deg = Wm.sum(axis=1)
    inv = np.zeros_like(deg)
    np.divide(1.0, np.sqrt(deg), out=inv, where=deg > 0)
    return inv[:, None] * Wm * inv[None, :]
