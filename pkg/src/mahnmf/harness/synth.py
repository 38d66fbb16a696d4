"""Synthetic data and noise injection for robustness experiments.

Noise model summary:

* ``laplace``: additive, location 0, ``level`` is the scale; ``density``
  restricts it to a random subset of entries.
* ``gaussian``: additive, ``level`` is the standard deviation.
* ``salt_pepper``: each entry is replaced with probability ``level`` by the
  matrix minimum or maximum (even odds).
* ``poisson``: multiplicative, ``X * P / k`` with ``P ~ Poisson(k)`` and
  ``k = 1 / level**2`` so ``level`` is the coefficient of variation.
* ``occlusion``: each column is viewed as an image of ``image_shape`` and a
  random block covering ``level`` of its area is set to 0 or to the max.

With ``clamp_nonneg`` negative results are clipped to 0, which truncates the
additive noise distributions slightly.
"""

from dataclasses import asdict, dataclass

import numpy as np

from ..core import as_matrix
from ..errors import ConfigError, DimensionError, DomainError

NOISE_KINDS = ("occlusion", "laplace", "salt_pepper", "gaussian", "poisson")


@dataclass(frozen=True)
class NoiseSpec:
    kind: str
    level: float = 0.1
    seed: int = 0
    clamp_nonneg: bool = True
    density: float = 1.0
    image_shape: tuple = None
    fill: str = "max"

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ConfigError(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        if self.level < 0:
            raise ConfigError("noise level must be non-negative")
        if self.kind in ("salt_pepper", "occlusion") and self.level >= 1:
            raise ConfigError(f"{self.kind} level must lie in [0, 1)")
        if not 0 < self.density <= 1:
            raise ConfigError("density must lie in (0, 1]")
        if self.fill not in ("zero", "max"):
            raise ConfigError("fill must be 'zero' or 'max'")
        if self.image_shape is not None:
            object.__setattr__(self, "image_shape", tuple(int(s) for s in self.image_shape))

    def to_dict(self):
        d = asdict(self)
        d["image_shape"] = list(self.image_shape) if self.image_shape else None
        return d


def gen_low_rank_plus_sparse(m, n, r, sparse_density=0.0, seed=0, spike_scale=None):
    """Return ``(X, L, S)`` with ``L = W^T H`` of rank ``r`` and ``X = L + S``.

    Factors are uniform on [0, 1). ``S`` has exactly
    ``round(sparse_density * m * n)`` non-zero entries, uniform on
    ``(0, spike_scale]`` (default: the largest entry of ``L``).
    """
    if r < 1 or r > min(m, n):
        raise DimensionError(f"rank {r} must lie in [1, {min(m, n)}]")
    if not 0 <= sparse_density < 1:
        raise DomainError("sparse_density must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    W = rng.random((r, m))
    H = rng.random((r, n))
    L = W.T @ H
    S = np.zeros((m, n))
    count = int(round(sparse_density * m * n))
    if count:
        scale = float(L.max()) if spike_scale is None else float(spike_scale)
        idx = rng.choice(m * n, size=count, replace=False)
        S.flat[idx] = scale * (1.0 - rng.random(count))
    return L + S, L, S


def _occlude(X, spec, rng):
    if spec.image_shape is None:
        raise ConfigError("occlusion noise needs image_shape")
    h, w = spec.image_shape
    if h * w != X.shape[0]:
        raise ConfigError(f"image_shape {spec.image_shape} does not match {X.shape[0]} rows")
    Y = X.copy()
    if spec.level == 0:
        return Y
    bh = max(1, int(round(np.sqrt(spec.level) * h)))
    bw = max(1, int(round(np.sqrt(spec.level) * w)))
    value = 0.0 if spec.fill == "zero" else float(X.max())
    for j in range(X.shape[1]):
        top = rng.integers(0, h - bh + 1)
        left = rng.integers(0, w - bw + 1)
        img = Y[:, j].reshape(h, w)
        img[top:top + bh, left:left + bw] = value
        Y[:, j] = img.ravel()
    return Y


def inject_noise(X, spec):
    """Corrupt ``X`` according to ``spec``; deterministic for a given seed."""
    X = as_matrix(X, "X", nonneg=True)
    rng = np.random.default_rng(spec.seed)
    kind, level = spec.kind, spec.level
    if kind == "occlusion":
        Y = _occlude(X, spec, rng)
    elif level == 0:
        Y = X.copy()
    elif kind == "laplace":
        noise = rng.laplace(0.0, level, X.shape)
        if spec.density < 1:
            noise *= rng.random(X.shape) < spec.density
        Y = X + noise
    elif kind == "gaussian":
        Y = X + rng.normal(0.0, level, X.shape)
    elif kind == "salt_pepper":
        hit = rng.random(X.shape) < level
        salt = rng.random(X.shape) < 0.5
        Y = X.copy()
        Y[hit & salt] = X.max()
        Y[hit & ~salt] = X.min()
    else:
        k = 1.0 / level ** 2
        Y = X * rng.poisson(k, X.shape) / k
    if spec.clamp_nonneg:
        Y = np.maximum(Y, 0.0)
    return Y
