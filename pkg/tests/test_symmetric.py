import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mahnmf.config import SolverConfig
from mahnmf.errors import DimensionError, DomainError
from mahnmf.symmetric import sym_coordinate_min, sym_coordinate_objective, sym_solve
from oracles import grid_argmin


def test_rank_one_recovery():
    h = np.random.default_rng(0).random(12) + 0.05
    X = np.outer(h, h)
    H, trace = sym_solve(X, 1)
    assert trace.final_objective <= 1e-6 * np.abs(X).sum()
    assert np.allclose(H[:, 0], h, atol=1e-6)


def test_identity_fixed_point():
    n = 6
    H, trace = sym_solve(np.eye(n), n, init=np.eye(n))
    assert np.array_equal(H, np.eye(n))
    assert trace.final_objective == 0


def test_asymmetric_rejected():
    X = np.random.default_rng(1).random((4, 4))
    with pytest.raises(DomainError):
        sym_solve(X, 1)
    with pytest.raises(DimensionError):
        sym_solve(np.ones((3, 4)), 1)
    # within tolerance is accepted
    Y = X + X.T
    Y[0, 1] += 1e-12
    sym_solve(Y, 1, max_sweeps=1)


def test_coordinate_matches_grid_oracle():
    g = np.random.default_rng(2)
    for _ in range(30):
        B = g.random((8, 3))
        X = B @ B.T + 0.1 * g.random((8, 8))
        X = 0.5 * (X + X.T)
        X /= X.max()
        H = g.random((8, 2)) * 0.5
        j, c = g.integers(8), g.integers(2)
        Z = X - H @ H.T + np.outer(H[:, c], H[:, c])
        others = np.arange(8) != j
        a, z_off = H[others, c], Z[others, j]
        h = sym_coordinate_min(Z[j, j], a, z_off)
        ref = grid_argmin(lambda x: sym_coordinate_objective(Z[j, j], a, z_off, x), 0.0, 4.0)
        f = lambda x: sym_coordinate_objective(Z[j, j], a, z_off, np.array([x]))[0]
        assert f(h) <= f(ref) + 1e-9
        assert abs(h - ref) <= 1e-4 or abs(f(h) - f(ref)) <= 1e-9


def test_coordinate_objective_is_restriction(rng):
    H = rng.random((5, 2))
    X = rng.random((5, 5))
    X = X + X.T
    j, c = 2, 1
    Z = X - H @ H.T + np.outer(H[:, c], H[:, c])
    others = np.arange(5) != j
    for v in (0.0, 0.3, 1.7):
        P = H.copy()
        P[j, c] = v
        full = np.abs(X - P @ P.T).sum()
        rest = full - np.abs(np.delete(np.delete(Z - np.outer(P[:, c], P[:, c]), j, 0), j, 1)).sum()
        assert sym_coordinate_objective(Z[j, j], H[others, c], Z[others, j], v) == pytest.approx(rest)


@given(st.integers(0, 100_000), st.integers(1, 3))
def test_sweeps_descend_and_stay_symmetric(seed, r):
    g = np.random.default_rng(seed)
    B = g.random((7, 3))
    X = B @ B.T
    H, trace = sym_solve(X, r, SolverConfig(rank=r, outer_tol=1e-9, max_outer=6))
    assert H.min() >= 0
    assert trace.is_monotone(1e-9)
    A = H @ H.T
    assert np.array_equal(A, A.T)


def test_scale_invariance():
    h = np.random.default_rng(3).random(6) + 0.1
    X = np.outer(h, h)
    H1, _ = sym_solve(X, 1, seed=5)
    H2, _ = sym_solve(100 * X, 1, seed=5)
    assert np.allclose(H2, 10 * H1, rtol=1e-9)
