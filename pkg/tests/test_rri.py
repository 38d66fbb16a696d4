import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mahnmf.config import Box, Elastic, Manifold, SolverConfig
from mahnmf.errors import ConfigError, DomainError
from mahnmf.rri import (pwl_plus_quadratic_min, rri_box_update, rri_manifold_update, rri_solve,
                        rri_update_H, weighted_l1_min)
from oracles import brute_weighted_l1, grid_argmin, pwq_objective, wl1_objective


def test_weighted_l1_examples():
    assert weighted_l1_min([1, 1, 1], [1, 2, 3]) == 2.0
    assert weighted_l1_min([1, 2], [2, 2]) == 1.0
    assert weighted_l1_min([1], [-5]) == 0.0
    assert weighted_l1_min([0, 0], [1, 2]) is None
    with pytest.raises(DomainError):
        weighted_l1_min([-1, 1], [1, 1])


def test_weighted_l1_leftmost_on_flat_segment():
    # slope is zero between 1 and 3
    assert weighted_l1_min([1, 1], [1, 3]) == 1.0


def test_weighted_l1_zero_weights_ignored():
    assert weighted_l1_min([0, 1, 1, 1], [100, 1, 2, 3]) == 2.0


@given(st.integers(0, 100_000), st.integers(1, 9))
def test_weighted_l1_matches_brute_force(seed, size):
    g = np.random.default_rng(seed)
    w = g.random(size) * (g.random(size) > 0.2)
    if not w.any():
        w[0] = 0.5
    z = g.normal(size=size) * 3
    x = weighted_l1_min(w, z)
    ref = brute_weighted_l1(w, z)
    f = wl1_objective(w, z)
    assert f(x)[0] == pytest.approx(f(ref)[0], rel=1e-12, abs=1e-12)
    assert x == pytest.approx(ref, abs=1e-12)


@given(st.integers(0, 100_000))
def test_weighted_l1_is_weighted_median(seed):
    g = np.random.default_rng(seed)
    w, z = g.random(7) + 0.01, g.random(7) * 4 - 1
    p = np.maximum(z / w, 0.0)
    order = np.argsort(p)
    cw = np.cumsum(w[order])
    med = p[order][np.searchsorted(cw, 0.5 * w.sum())]
    assert weighted_l1_min(w, z) == pytest.approx(med, abs=1e-12)


def test_pwq_examples():
    assert pwl_plus_quadratic_min([1.0], [1.0], 1.0, 0.0) == pytest.approx(0.5)
    assert pwl_plus_quadratic_min([], [], 2.0, 3.7) == 3.7
    with pytest.raises(DomainError):
        pwl_plus_quadratic_min([1.0], [1.0], 0.0, 0.0)
    # duplicates merge: two unit weights at 0 act like weight 2
    assert pwl_plus_quadratic_min([1.0, 1.0], [0.0, 0.0], 1.0, 5.0) == pytest.approx(
        pwl_plus_quadratic_min([2.0], [0.0], 1.0, 5.0))


def test_pwq_matches_grid():
    g = np.random.default_rng(0)
    for _ in range(40):
        k = g.integers(1, 6)
        a, xb = g.random(k) + 0.05, g.normal(size=k) * 2
        b, d = g.uniform(0.05, 3), g.normal() * 2
        x = pwl_plus_quadratic_min(a, xb, b, d)
        ref = grid_argmin(pwq_objective(a, xb, b, d), -12, 12)
        assert abs(x - ref) <= 1e-4


@given(st.integers(0, 100_000), st.integers(1, 8))
def test_pwq_subgradient_optimality(seed, k):
    g = np.random.default_rng(seed)
    a, xb = g.random(k) + 0.01, np.round(g.normal(size=k), 1)
    b, d = g.uniform(0.01, 5), g.normal()
    x = pwl_plus_quadratic_min(a, xb, b, d)
    at = np.isclose(x, xb, rtol=0, atol=1e-12)
    smooth = 2 * b * (x - d) + np.sum(a[~at] * np.sign(x - xb[~at]))
    slack = a[at].sum()
    assert -slack - 1e-8 <= smooth <= slack + 1e-8


def grid_row_update(Z, w, hi=None):
    out = []
    for j in range(Z.shape[1]):
        top = hi if hi is not None else max(1.0, 1.2 * np.max(np.abs(Z[:, j]) / np.min(w)))
        out.append(grid_argmin(wl1_objective(w, Z[:, j]), 0.0, top, step=1e-4, coarse=1e-2))
    return np.array(out)


@pytest.mark.parametrize("box", [False, True])
def test_rri_update_matches_grid_oracle(box):
    g = np.random.default_rng(1)
    X = g.random((10, 8))
    if not box:
        X *= 3
    W, H = g.random((2, 10)) + 0.1, g.random((2, 8))
    Hn = rri_update_H(X, W, H, 0.0, max_sweeps=1, box=box)
    Hs = H.copy()
    for l in range(2):
        Z = X - W.T @ Hs + np.outer(W[l], Hs[l])
        Hs[l] = grid_row_update(Z, W[l], 1.0 if box else None)
        assert np.allclose(Hn[l], Hs[l], atol=1e-4)
        Hs[l] = Hn[l]


def test_rri_update_rank_one_exact():
    g = np.random.default_rng(2)
    w, h = g.random(12) + 0.1, g.random(9)
    H = rri_update_H(np.outer(w, h), w[None, :], np.ones((1, 9)), 0.0, max_sweeps=1)
    assert np.allclose(H[0], h, atol=1e-14)


def test_rri_update_zero_matrix():
    g = np.random.default_rng(3)
    H = rri_update_H(np.zeros((5, 4)), g.random((2, 5)), g.random((2, 4)), 0.0, max_sweeps=1)
    # the residual is updated incrementally, so zero is reached up to rounding
    assert np.abs(H).max() <= 1e-14


def test_rri_update_zero_weight_row_kept():
    g = np.random.default_rng(4)
    W, H = g.random((2, 5)), g.random((2, 4))
    W[1] = 0
    Hn = rri_update_H(g.random((5, 4)), W, H, 0.0, max_sweeps=1)
    assert np.array_equal(Hn[1], H[1])


@given(st.integers(0, 100_000))
def test_row_updates_descend_and_last_row_is_coordinate_optimal(seed):
    g = np.random.default_rng(seed)
    X, W, H = g.random((7, 5)), g.random((3, 7)), g.random((3, 5))
    f = np.abs(X - W.T @ H).sum()
    Hc = H.copy()
    for l in range(3):
        Hc[l] = rri_update_H(X - W.T @ Hc + np.outer(W[l], Hc[l]), W[l:l + 1], Hc[l:l + 1],
                             0.0, max_sweeps=1)[0]
        f_new = np.abs(X - W.T @ Hc).sum()
        assert f_new <= f + 1e-12
        f = f_new
    Hn = rri_update_H(X, W, H, 0.0, max_sweeps=1)
    assert np.allclose(Hn, Hc, atol=1e-12)
    base = np.abs(X - W.T @ Hn).sum()
    for j in range(5):
        for d in (1e-3, -1e-3, 1e-2, -1e-2):
            P = Hn.copy()
            P[2, j] += d
            if P[2, j] >= 0:
                assert np.abs(X - W.T @ P).sum() >= base - 1e-12


def test_box_update_clamps():
    W = np.array([[1.0]])
    assert rri_box_update([[0.4]], W, [[0.0]])[0, 0] == pytest.approx(0.4)
    assert rri_box_update([[1.7]], W, [[0.0]])[0, 0] == 1.0


def _similarity(n, seed):
    g = np.random.default_rng(seed)
    S = g.random((n, n))
    S = 0.5 * (S + S.T)
    np.fill_diagonal(S, 0)
    return S


def test_manifold_beta_zero_equals_plain():
    g = np.random.default_rng(5)
    X, W, H = g.random((8, 6)), g.random((2, 8)), g.random((2, 6))
    S = _similarity(6, 0)
    a = rri_manifold_update(X, W, H, 0.0, S, 0.0, max_sweeps=1)
    b = rri_update_H(X, W, H, 0.0, max_sweeps=1)
    assert np.allclose(a, b, atol=1e-14)


def test_manifold_huge_beta_pulls_to_neighbours():
    n = 5
    X = np.zeros((3, n))
    W = np.ones((1, 3))
    H = np.full((1, n), 0.7)
    H[0, 0] = 3.0
    S = np.zeros((n, n))
    S[0, 1:] = S[1:, 0] = 1.0
    Hn = rri_manifold_update(X, W, H, 1e9, S, 0.0, max_sweeps=1)
    assert Hn[0, 0] == pytest.approx(0.7, abs=1e-6)


def test_manifold_coordinates_match_grid():
    g = np.random.default_rng(6)
    X, W, H = g.random((6, 6)), g.random((1, 6)) + 0.1, g.random((1, 6))
    S, beta = _similarity(6, 1), 0.8
    Hn = rri_manifold_update(X, W, H, beta, S, 0.0, max_sweeps=1)
    Hs = H.copy()
    for j in range(2):
        Z = X[:, j]
        others = np.arange(6) != j

        def f(x, j=j, Z=Z, others=others):
            x = np.atleast_1d(x)
            fit = np.abs(Z[None, :] - np.outer(x, W[0])).sum(axis=1)
            reg = 0.5 * beta * (S[others, j][None, :] * (Hs[0, others][None, :] - x[:, None]) ** 2).sum(1)
            return fit + reg

        ref = grid_argmin(f, 0.0, 5.0, step=1e-5)
        assert abs(Hn[0, j] - ref) <= 1e-4
        Hs[0, j] = Hn[0, j]


def test_manifold_objective_descends():
    g = np.random.default_rng(7)
    X, W, H = g.random((8, 6)), g.random((2, 8)), g.random((2, 6))
    S, beta = _similarity(6, 2), 0.5
    L = np.diag(S.sum(1)) - S

    def obj(Hh):
        return np.abs(X - W.T @ Hh).sum() + 0.5 * beta * np.trace(Hh @ L @ Hh.T)

    prev = obj(H)
    for _ in range(4):
        H = rri_manifold_update(X, W, H, beta, S, 0.0, max_sweeps=1)
        assert obj(H) <= prev + 1e-12
        prev = obj(H)


def test_rri_solve_rank_one_and_zero():
    g = np.random.default_rng(8)
    X = np.outer(g.random(30), g.random(20))
    _, trace = rri_solve(X, SolverConfig(rank=1))
    assert trace.final_objective <= 1e-6 * np.abs(X).sum()
    _, trace = rri_solve(np.zeros((5, 4)), SolverConfig(rank=1))
    assert trace.final_objective == 0


@pytest.mark.parametrize("seed", range(5))
def test_rri_solve_monotone(seed):
    X = np.random.default_rng(seed).random((20, 10))
    _, trace = rri_solve(X, SolverConfig(rank=3, seed=seed, outer_tol=1e-6))
    assert trace.is_monotone(1e-8)
    assert all(np.isnan(r.lam) and np.isnan(r.smoothed_objective) for r in trace.records)


def test_rri_solve_variants():
    X = np.random.default_rng(9).random((10, 8))
    F, _ = rri_solve(X, SolverConfig(rank=2, variant=Box()))
    assert F.W.max() <= 1 and F.H.max() <= 1
    S = _similarity(8, 3)
    L = np.diag(S.sum(1)) - S
    _, tr = rri_solve(X, SolverConfig(rank=2, variant=Manifold(0.3, L)))
    assert tr.is_monotone()
    with pytest.raises(ConfigError):
        rri_solve(X, SolverConfig(rank=2, variant=Elastic(1.0)))
