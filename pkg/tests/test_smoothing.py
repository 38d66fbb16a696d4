import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mahnmf.errors import DegenerateBasisError, DegenerateBasisWarning, DomainError
from mahnmf.smoothing import (SmoothingState, dual_solution, psi, sandwich_gap,
                              smoothed_gradient, smoothed_objective)
from oracles import central_diff


def instance(seed, m=6, n=4, r=2, lam=0.1):
    g = np.random.default_rng(seed)
    X, W, H = g.random((m, n)), g.random((r, m)), g.random((r, n))
    return X, W, H, SmoothingState.from_basis(W, lam)


def test_psi_values():
    assert psi(0.0, 0.1) == 0
    assert psi(0.05, 0.1) == pytest.approx(0.0125)
    assert psi(0.2, 0.1) == pytest.approx(0.15)
    with pytest.raises(DomainError):
        psi(-1.0, 0.1)
    with pytest.raises(DomainError):
        psi(1.0, 0.0)


@given(st.floats(0, 10), st.floats(1e-3, 5))
def test_psi_bounds(tau, lam):
    v = psi(tau, lam)
    assert v <= tau + 1e-12 and tau <= v + lam / 2 + 1e-12


def test_state_fields():
    W = np.array([[3.0, 0.0], [4.0, 1.0]])
    s = SmoothingState.from_basis(W, 0.5)
    assert np.allclose(s.dual_weights, [5.0, 1.0])
    assert s.big_d == pytest.approx(6.0)
    assert s.lipschitz == pytest.approx(12.0)


def test_dual_solution_examples():
    s = SmoothingState.from_basis(np.array([[1.0, 1.0]]), 0.1)
    assert np.all(dual_solution(np.zeros((2, 3)), s) == 0)
    # lambda * weight = 1
    U = dual_solution(np.array([[10.0], [-5.0]]), SmoothingState.from_basis(np.eye(2), 1.0))
    assert U[0, 0] == 1.0 and U[1, 0] == -1.0
    U = dual_solution(np.array([[0.03]]), SmoothingState.from_basis(np.array([[1.0]]), 0.1))
    assert U[0, 0] == pytest.approx(0.3)


def test_dual_solution_degenerate():
    s = SmoothingState.from_basis(np.array([[1.0, 0.0]]), 0.1)
    with pytest.raises(DegenerateBasisError):
        dual_solution(np.ones((2, 2)), s)


def test_smoothed_objective_examples():
    X, W, H, s = instance(0)
    assert smoothed_objective(W.T @ H, W, H, s) == pytest.approx(0.0, abs=1e-15)
    s1 = SmoothingState.from_basis(np.array([[1.0]]), 0.1)
    for h, x in [(0.3, 0.27), (2.0, 0.5)]:
        val = smoothed_objective([[x]], [[1.0]], [[h]], s1)
        assert val == pytest.approx(psi(abs(h - x), 0.1), rel=1e-12)


def test_gradient_examples():
    X, W, H, s = instance(1)
    assert np.all(smoothed_gradient(W.T @ H, W, H, s) == 0)
    for w, h, x, lam in [(2.0, 1.0, 1.9, 0.1), (2.0, 1.0, 1.99, 0.1)]:
        s1 = SmoothingState.from_basis(np.array([[w]]), lam)
        g = smoothed_gradient([[x]], [[w]], [[h]], s1)[0, 0]
        assert g == pytest.approx(w * np.clip((w * h - x) / (lam * w), -1, 1))


@pytest.mark.parametrize("seed", range(10))
def test_gradient_matches_finite_differences(seed):
    X, W, H, s = instance(seed, lam=[1.0, 0.1, 0.01][seed % 3])
    G = smoothed_gradient(X, W, H, s)
    G_fd = central_diff(lambda Hh: smoothed_objective(X, W, Hh, s), H)
    assert np.linalg.norm(G - G_fd) <= 1e-5 * max(np.linalg.norm(G_fd), 1e-12)


def test_sandwich_gap_values():
    s = SmoothingState.from_basis(np.array([[2.0]]), 0.1)
    assert sandwich_gap(s, 5) == pytest.approx(0.5)
    assert sandwich_gap(SmoothingState.from_basis(np.array([[2.0]]), 1e-300), 5) < 1e-290


@given(st.integers(0, 100_000), st.sampled_from([1.0, 0.1, 0.01]))
def test_sandwich_property(seed, lam):
    X, W, H, s = instance(seed, lam=lam)
    f = np.abs(X - W.T @ H).sum()
    fl = smoothed_objective(X, W, H, s)
    assert fl <= f + 1e-9 and f <= fl + sandwich_gap(s, X.shape[1]) + 1e-9


@given(st.integers(0, 100_000))
def test_lipschitz_bound(seed):
    X, W, H1, s = instance(seed, lam=0.05)
    H2 = np.random.default_rng(seed + 1).random(H1.shape)
    dg = np.linalg.norm(smoothed_gradient(X, W, H1, s) - smoothed_gradient(X, W, H2, s))
    assert dg <= s.lipschitz * np.linalg.norm(H1 - H2) + 1e-12


@given(st.integers(0, 100_000))
def test_larger_lambda_sits_lower(seed):
    X, W, H, _ = instance(seed)
    lo = smoothed_objective(X, W, H, SmoothingState.from_basis(W, 0.5))
    hi = smoothed_objective(X, W, H, SmoothingState.from_basis(W, 0.05))
    assert lo <= hi + 1e-12


@given(st.integers(0, 100_000))
def test_dual_in_unit_box(seed):
    X, W, H, s = instance(seed, lam=0.01)
    U = dual_solution(W.T @ H - X, s)
    assert np.all(np.abs(U) <= 1)


def test_degenerate_row_drop_and_warn(rng):
    W = rng.random((2, 4))
    W[:, 1] = 0
    X, H = rng.random((4, 3)), rng.random((2, 3))
    s = SmoothingState.from_basis(W, 0.1)
    with pytest.raises(DegenerateBasisError):
        smoothed_objective(X, W, H, s)
    with pytest.warns(DegenerateBasisWarning):
        val = smoothed_objective(X, W, H, s, drop_degenerate=True)
    f = np.abs(X - W.T @ H).sum()
    assert val <= f + 1e-12 and f <= val + sandwich_gap(s, 3) + 1e-12
