import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from truncsparse.data import Dataset
from truncsparse.losses import loss_grad_scalar
from truncsparse.truncation import (GravitySchedule, TruncationParams, classical_online_run,
                                    gd_step, masked_l1, truncate_entry, truncate_vector)

ws = st.floats(-5, 5, allow_nan=False)
alphas = st.floats(0, 2, allow_nan=False)
thetas = st.floats(0.01, 4, allow_nan=False)


@pytest.mark.parametrize("w,want", [(0.5, 0.3), (-0.1, 0.0), (2.0, 2.0)])
def test_truncate_entry_cases(w, want):
    assert truncate_entry(w, 0.2, 1.0) == pytest.approx(want)


def test_truncate_vector_cases():
    np.testing.assert_allclose(truncate_vector(np.array([0.5, -0.1, 2.0]), 0.2, 1.0), [0.3, 0.0, 2.0])
    np.testing.assert_array_equal(truncate_vector(np.zeros(3), 0.7, 0.4), np.zeros(3))
    np.testing.assert_array_equal(truncate_vector(np.array([0.3, -0.3]), 0.0, 1.0), [0.3, -0.3])


def test_boundary_is_truncated():
    assert truncate_entry(1.0, 0.25, 1.0) == 0.75
    assert truncate_entry(-1.0, 0.25, 1.0) == -0.75


def test_bad_arguments():
    with pytest.raises(ValueError):
        truncate_entry(0.1, -0.1, 1.0)
    with pytest.raises(ValueError):
        truncate_entry(0.1, 0.1, 0.0)
    with pytest.raises(ValueError):
        truncate_entry(float("inf"), 0.1, 1.0)


def test_gd_step_cases():
    np.testing.assert_allclose(gd_step(np.array([1.0, 1.0]), np.array([1.0, 0.0]), 0.1), [0.9, 1.0])
    w = np.array([0.3, -2.0])
    np.testing.assert_array_equal(gd_step(w, np.zeros(2), 0.4), w)
    np.testing.assert_allclose(gd_step(np.array([0.0]), np.array([2.0]), 0.5), [-1.0])


@given(ws, alphas, thetas)
def test_shrinks_and_keeps_sign(w, a, th):
    out = truncate_entry(w, a, th)
    assert abs(out) <= abs(w)
    assert out == 0.0 or np.sign(out) == np.sign(w)
    if abs(w) > th or a == 0.0 or w == 0.0:
        assert out == w
    elif a > abs(w) * 1e-15:
        # shrinkage far below one ulp of w is lost to rounding
        assert abs(out) < abs(w)


@given(ws, ws, alphas, thetas)
def test_monotone_in_w(w1, w2, a, th):
    lo, hi = sorted((w1, w2))
    assert truncate_entry(lo, a, th) <= truncate_entry(hi, a, th)


@given(st.lists(ws, min_size=1, max_size=12), alphas, alphas, thetas)
def test_more_gravity_is_sparser(w, a1, a2, th):
    a1, a2 = sorted((a1, a2))
    w = np.array(w)
    small, big = truncate_vector(w, a1, th), truncate_vector(w, a2, th)
    assert np.all(np.abs(big) <= np.abs(small))
    assert np.count_nonzero(big) <= np.count_nonzero(small)


@given(st.lists(ws, min_size=1, max_size=12), alphas, thetas)
def test_vector_matches_scalar(w, a, th):
    got = truncate_vector(np.array(w), a, th)
    assert list(got) == [truncate_entry(v, a, th) for v in w]


def _params(eta, g, theta=1.0, rounds=1, **kw):
    return TruncationParams(theta=theta, eta=eta, gravity=GravitySchedule.constant(g, rounds), **kw)


def test_single_round_squared():
    data = Dataset(np.array([[1.0, 0.0]]), np.array([1.0]))
    tr = classical_online_run("squared", data, _params(0.1, 0.0))
    assert tr.rows[0].y_hat == 0.0
    np.testing.assert_allclose(tr.final_weights, [0.2, 0.0])


def test_single_round_hinge():
    data = Dataset(np.array([[1.0]]), np.array([1.0]))
    tr = classical_online_run("hinge", data, _params(0.1, 0.5))
    np.testing.assert_allclose(tr.final_weights, [0.05])


def _naive(kind, X, y, eta, g, theta, step_factor=2.0):
    # plain loop, written independently of the library
    w = [0.0] * X.shape[1]
    for t in range(X.shape[0]):
        p = sum(wi * xi for wi, xi in zip(w, X[t]))
        s = loss_grad_scalar(kind, p, y[t], step_factor)
        w = [wi + eta * s * xi for wi, xi in zip(w, X[t])]
        a = g * eta
        w = [max(v - a, 0.0) if 0 <= v <= theta else min(v + a, 0.0) if -theta <= v <= 0 else v for v in w]
    return np.array(w)


@pytest.mark.parametrize("kind", ["logistic", "hinge", "squared"])
@pytest.mark.parametrize("g", [0.0, 0.3])
def test_matches_naive_loop(kind, g, rng):
    T, d = 50, 20
    X = rng.normal(size=(T, d)) / np.sqrt(d)
    y = np.sign(rng.normal(size=T)) if kind != "squared" else rng.normal(size=T)
    tr = classical_online_run(kind, Dataset(X, y), _params(0.05, g, 0.5, T))
    np.testing.assert_allclose(tr.final_weights, _naive(kind, X, y, 0.05, g, 0.5), atol=1e-12)


def test_zero_gravity_is_plain_gradient_descent(rng):
    T, d = 40, 6
    X = rng.normal(size=(T, d))
    y = rng.normal(size=T)
    tr = classical_online_run("squared", Dataset(X, y), _params(0.01, 0.0, 0.3, T), keep_weights=True)
    w = np.zeros(d)
    for t in range(T):
        grad = -loss_grad_scalar("squared", float(w @ X[t]), y[t]) * X[t]
        w = gd_step(w, grad, 0.01)
        np.testing.assert_allclose(tr.weight_history[t + 1], w, atol=1e-12)


def test_trace_bookkeeping(rng):
    T, d = 30, 8
    X = rng.normal(size=(T, d)) * 0.3
    y = np.sign(rng.normal(size=T))
    params = _params(0.2, 0.4, 0.6, T)
    tr = classical_online_run("logistic", Dataset(X, y), params, keep_weights=True)
    for t, row in enumerate(tr.rows, start=1):
        w_next = tr.weight_history[t]
        assert row.q == masked_l1(w_next, 0.6)
        assert row.nnz == np.count_nonzero(w_next)
        np.testing.assert_array_equal(tr.masks[t - 1], np.abs(w_next) <= 0.6)
        assert row.y_hat == pytest.approx(float(tr.weight_history[t - 1] @ X[t - 1]), abs=1e-12)


def test_period_k_truncates_every_kth_round():
    p = _params(0.5, 0.2, rounds=6, period_k=3)
    assert [p.alpha(t) for t in range(1, 7)] == [0.0, 0.0, 0.1, 0.0, 0.0, 0.1]


def test_params_validation():
    with pytest.raises(ValueError):
        _params(1.5, 0.1)
    with pytest.raises(ValueError):
        GravitySchedule(np.array([0.1, -0.1]), 0.1)
    with pytest.raises(ValueError):
        classical_online_run("squared", Dataset(np.ones((3, 2)), np.ones(3)), _params(0.1, 0.1, rounds=2))
