"""Losses for linear prediction and the scalar step used by the online update.

Every loss here has the form ``h(yhat, y)`` where ``yhat = w.x``. The online
update is written ``w' = w + eta * s * x`` with ``s`` returned by
:func:`loss_grad_scalar`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class ProblemKind(str, Enum):
    LOGISTIC = "logistic"
    HINGE = "hinge"
    SQUARED = "squared"

    @classmethod
    def parse(cls, value: "ProblemKind | str") -> "ProblemKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown problem kind {value!r}; expected one of "
                             f"{[k.value for k in cls]}") from None


@dataclass(frozen=True)
class LossConstants:
    """Constants with ``||grad||^2 <= a_const * loss + b_const`` for ``||x|| <= c_bound``."""

    a_const: float
    b_const: float
    c_bound: float

    def __post_init__(self):
        if self.a_const < 0 or self.b_const < 0:
            raise ValueError("loss constants must be nonnegative")
        if not self.c_bound > 0:
            raise ValueError("c_bound must be positive")


def check_label(kind: ProblemKind | str, y: float) -> None:
    kind = ProblemKind.parse(kind)
    if not math.isfinite(y):
        raise ValueError(f"label must be finite, got {y}")
    if kind is not ProblemKind.SQUARED and y not in (-1.0, 1.0):
        raise ValueError(f"{kind.value} labels must be -1 or +1, got {y}")


def _check(kind: ProblemKind, pred: float, y: float) -> ProblemKind:
    kind = ProblemKind.parse(kind)
    if not math.isfinite(pred):
        raise ValueError(f"prediction must be finite, got {pred}")
    check_label(kind, y)
    return kind


def _log1pexp(z: float) -> float:
    # ln(1 + e^z) without overflow
    if z > 0:
        return z + math.log1p(math.exp(-z))
    return math.log1p(math.exp(z))


def sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def loss_value(kind: ProblemKind, pred: float, y: float) -> float:
    kind = _check(kind, pred, y)
    if kind is ProblemKind.LOGISTIC:
        return _log1pexp(-pred * y)
    if kind is ProblemKind.HINGE:
        return max(0.0, 1.0 - pred * y)
    return (pred - y) ** 2


def loss_grad_scalar(kind: ProblemKind, pred: float, y: float,
                     step_factor: float = 2.0) -> float:
    """Scalar ``s`` of the pre-truncation update ``w + eta * s * x``.

    For the squared and hinge losses ``s`` is minus the derivative of the
    loss in ``pred``. For the logistic loss it is ``step_factor`` times
    ``y * sigmoid(-y * pred)``; with ``step_factor=1`` this is again the
    exact negative derivative. ``step_factor`` is ignored for the other kinds.
    """
    kind = _check(kind, pred, y)
    if kind is ProblemKind.LOGISTIC:
        return step_factor * y * sigmoid(-y * pred)
    if kind is ProblemKind.HINGE:
        # strict inequality: the kink yhat*y == 1 takes the zero branch
        return y if y * pred < 1.0 else 0.0
    return 2.0 * (y - pred)


def loss_constants(kind: ProblemKind, c_bound: float) -> LossConstants:
    kind = ProblemKind.parse(kind)
    if not c_bound > 0:
        raise ValueError("c_bound must be positive")
    if kind is ProblemKind.SQUARED:
        return LossConstants(a_const=4.0 * c_bound**2, b_const=0.0, c_bound=c_bound)
    return LossConstants(a_const=0.0, b_const=c_bound**2, c_bound=c_bound)
