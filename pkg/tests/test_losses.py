import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from truncsparse.losses import (ProblemKind, check_label, loss_constants, loss_grad_scalar,
                                loss_value, sigmoid)

preds = st.floats(-30, 30, allow_nan=False)
signs = st.sampled_from([-1.0, 1.0])
kinds = st.sampled_from(list(ProblemKind))


def label_for(kind, y):
    return y if kind is not ProblemKind.SQUARED else 0.7 * y


@pytest.mark.parametrize("kind,pred,y,want", [
    (ProblemKind.LOGISTIC, 0.0, 1.0, math.log(2)),
    (ProblemKind.HINGE, 2.0, 1.0, 0.0),
    (ProblemKind.SQUARED, 1.5, 1.0, 0.25),
])
def test_loss_values(kind, pred, y, want):
    assert loss_value(kind, pred, y) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("kind,pred,y,want", [
    (ProblemKind.LOGISTIC, 0.0, 1.0, 1.0),
    (ProblemKind.HINGE, 2.0, 1.0, 0.0),
    (ProblemKind.SQUARED, 0.5, 1.0, 1.0),
])
def test_grad_scalars(kind, pred, y, want):
    assert loss_grad_scalar(kind, pred, y) == pytest.approx(want)


def test_hinge_kink_uses_zero_subgradient():
    assert loss_grad_scalar("hinge", 1.0, 1.0) == 0.0
    assert loss_grad_scalar("hinge", 0.999, 1.0) == 1.0


@pytest.mark.parametrize("kind,c,ab", [
    ("logistic", 1.0, (0.0, 1.0)),
    ("squared", 2.0, (16.0, 0.0)),
    ("hinge", 1.0, (0.0, 1.0)),
])
def test_loss_constants(kind, c, ab):
    k = loss_constants(kind, c)
    assert (k.a_const, k.b_const) == ab


def test_parse_and_labels():
    assert ProblemKind.parse("Hinge") is ProblemKind.HINGE
    with pytest.raises(ValueError):
        ProblemKind.parse("svm")
    with pytest.raises(ValueError):
        check_label("hinge", 0.0)
    with pytest.raises(ValueError):
        check_label("squared", float("nan"))
    check_label("squared", 3.25)


def test_sigmoid_extremes():
    assert sigmoid(800.0) == 1.0
    assert sigmoid(-800.0) == pytest.approx(0.0, abs=1e-300)
    assert loss_value("logistic", -800.0, 1.0) == pytest.approx(800.0)


@given(kinds, preds, preds, st.floats(0, 1), signs)
def test_convex_in_prediction(kind, p1, p2, lam, y):
    y = label_for(kind, y)
    mid = loss_value(kind, lam * p1 + (1 - lam) * p2, y)
    chord = lam * loss_value(kind, p1, y) + (1 - lam) * loss_value(kind, p2, y)
    assert mid <= chord + 1e-9 * (1 + abs(chord))


@given(kinds, preds, signs)
def test_nonnegative(kind, p, y):
    assert loss_value(kind, p, label_for(kind, y)) >= 0.0


@given(kinds, st.floats(-5, 5), signs)
def test_scalar_is_negative_derivative(kind, p, y):
    y = label_for(kind, y)
    if kind is ProblemKind.HINGE:
        assume(abs(1 - y * p) > 1e-3)
    h = 1e-6
    fd = (loss_value(kind, p + h, y) - loss_value(kind, p - h, y)) / (2 * h)
    # the logistic scalar carries an extra factor step_factor
    s = loss_grad_scalar(kind, p, y, step_factor=1.0)
    assert -fd == pytest.approx(s, abs=1e-5)


@given(kinds, preds, signs, st.floats(0.1, 3.0), st.integers(0, 2**31))
def test_gradient_energy_bound(kind, p, y, c, seed):
    y = label_for(kind, y)
    x = np.random.default_rng(seed).normal(size=4)
    x *= c * np.random.default_rng(seed + 1).uniform() / np.linalg.norm(x)
    s = loss_grad_scalar(kind, p, y, step_factor=1.0)
    k = loss_constants(kind, c)
    lhs = float(np.sum((s * x) ** 2))
    rhs = k.a_const * loss_value(kind, p, y) + k.b_const
    assert lhs <= rhs * (1 + 1e-9) + 1e-12
