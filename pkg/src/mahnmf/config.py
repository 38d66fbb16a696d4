"""Solver configuration and variant selectors."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .prox import GroupStructure


@dataclass(frozen=True)
class Plain:
    name = "plain"


@dataclass(frozen=True)
class Box:
    """Entries of both factors restricted to [0, 1]."""

    name = "box"


@dataclass(frozen=True, eq=False)
class Manifold:
    """Graph regularizer ``beta/2 tr(H L H^T)`` over the columns of ``H``."""

    beta: float
    laplacian: np.ndarray
    similarity: np.ndarray = None
    name = "manifold"

    def __post_init__(self):
        if self.beta < 0:
            raise ConfigError("beta must be non-negative")
        L = np.asarray(self.laplacian, dtype=np.float64)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise ConfigError("laplacian must be square")
        object.__setattr__(self, "laplacian", L)
        if self.similarity is None:
            object.__setattr__(self, "similarity", np.diag(np.diag(L)) - L)


@dataclass(frozen=True)
class Elastic:
    """Adds ``alpha/2 ||X - W^T H||_F^2`` to the Manhattan loss."""

    alpha: float
    name = "elastic"

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError("alpha must be positive")


@dataclass(eq=False)
class Group:
    """Group sparsity on the columns of ``H`` and/or ``W``."""

    h_groups: GroupStructure = None
    w_groups: GroupStructure = None
    name = "group"

    def __post_init__(self):
        if self.h_groups is None and self.w_groups is None:
            raise ConfigError("group variant needs h_groups or w_groups")


@dataclass
class SolverConfig:
    rank: int
    lambda0: float = 0.1
    outer_tol: float = 0.1
    inner_tol: object = "adaptive"
    max_outer: int = 200
    max_inner: int = 500
    variant: object = field(default_factory=Plain)
    monotone_y: bool = False
    seed: int = 0
    inner_tol_floor: float = 1e-8
    inner_tol_scale: float = 1e-3
    warm_center: bool = True

    def __post_init__(self):
        if int(self.rank) < 1:
            raise ConfigError("rank must be >= 1")
        if not self.lambda0 > 0:
            raise ConfigError("lambda0 must be positive")
        if not self.outer_tol > 0:
            raise ConfigError("outer_tol must be positive")
        if self.inner_tol != "adaptive":
            try:
                self.inner_tol = float(self.inner_tol)
            except (TypeError, ValueError):
                raise ConfigError(f"inner_tol must be 'adaptive' or a number, got {self.inner_tol!r}")
            if not self.inner_tol > 0:
                raise ConfigError("inner_tol must be positive")
        if not 0 < self.inner_tol_scale <= 1:
            raise ConfigError("inner_tol_scale must lie in (0, 1]")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ConfigError("iteration caps must be >= 1")
        self.rank = int(self.rank)

    @property
    def adaptive(self):
        return self.inner_tol == "adaptive"
