"""Truncation operator, plain and truncated gradient descent, and the dense
online learner used as ground truth for everything else in the package."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .data import Dataset, Example, as_arrays
from .losses import ProblemKind, check_label, loss_grad_scalar, loss_value
from .trace import RunTrace, TraceRow


@dataclass(frozen=True)
class GravitySchedule:
    g_values: np.ndarray = field(repr=False)
    g_max: float

    def __post_init__(self):
        g = np.asarray(self.g_values, dtype=float)
        object.__setattr__(self, "g_values", g)
        if g.ndim != 1:
            raise ValueError("gravity schedule must be one-dimensional")
        if (g < 0).any():
            raise ValueError("gravity values must be nonnegative")
        if g.size and g.max() > self.g_max:
            raise ValueError(f"gravity {g.max()} exceeds g_max {self.g_max}")

    @classmethod
    def constant(cls, g: float, rounds: int) -> "GravitySchedule":
        return cls(np.full(rounds, float(g)), float(g))

    def __len__(self) -> int:
        return self.g_values.size

    def __getitem__(self, t: int) -> float:
        """Gravity of round ``t`` (1-based)."""
        return float(self.g_values[t - 1])


@dataclass(frozen=True)
class TruncationParams:
    theta: float
    eta: float
    gravity: GravitySchedule
    period_k: int = 1
    step_factor: float = 2.0

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if not 0 < self.eta < 1:
            raise ValueError(f"learning rate must lie in (0, 1), got {self.eta}")
        if self.period_k < 1:
            raise ValueError("period_k must be >= 1")
        if not self.step_factor > 0:
            raise ValueError("step_factor must be positive")

    def alpha(self, t: int) -> float:
        """Shrinkage applied after round ``t``; zero on rounds that skip truncation."""
        if t % self.period_k:
            return 0.0
        return self.gravity[t] * self.eta


def truncate_entry(w: float, alpha: float, theta: float) -> float:
    if not math.isfinite(w):
        raise ValueError(f"weight must be finite, got {w}")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if not theta > 0:
        raise ValueError("theta must be positive")
    if 0.0 <= w <= theta:
        return max(w - alpha, 0.0)
    if -theta <= w <= 0.0:
        return min(w + alpha, 0.0)
    return w


def truncate_vector(w: np.ndarray, alpha: float, theta: float) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if not np.isfinite(w).all():
        raise ValueError("weights must be finite")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if not theta > 0:
        raise ValueError("theta must be positive")
    out = w.copy()
    pos = (w >= 0) & (w <= theta)
    neg = (w < 0) & (w >= -theta)
    out[pos] = np.maximum(w[pos] - alpha, 0.0)
    out[neg] = np.minimum(w[neg] + alpha, 0.0)
    return out


def gd_step(w: np.ndarray, grad: np.ndarray, eta: float) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if w.shape != grad.shape:
        raise ValueError(f"dimension mismatch: {w.shape} vs {grad.shape}")
    return w - eta * grad


def masked_l1(w: np.ndarray, theta: float) -> float:
    """``||w * I(|w| <= theta)||_1``."""
    a = np.abs(w)
    return float(a[a <= theta].sum())


def classical_online_run(kind: ProblemKind | str,
                         stream: Dataset | Iterable[Example],
                         params: TruncationParams,
                         prediction_override: Optional[Sequence[float]] = None,
                         keep_weights: bool = False) -> RunTrace:
    """Dense online truncated gradient descent.

    Each round predicts ``w.x``, takes the step ``w + eta*s*x`` and, every
    ``period_k`` rounds, truncates with ``alpha = g^(t) * eta``. If
    ``prediction_override`` is given its values replace the predictions fed
    to the loss and the step, which lets this run replay a trajectory driven
    by estimated predictions. ``keep_weights`` stores every ``w^(t)``,
    ``t = 1..T+1``, as rows of ``trace.weight_history``.
    """
    kind = ProblemKind.parse(kind)
    X, y = as_arrays(stream)
    T, d = X.shape
    if T == 0:
        raise ValueError("empty stream")
    if len(params.gravity) < T:
        raise ValueError(f"gravity schedule has {len(params.gravity)} rounds, stream has {T}")
    if prediction_override is not None and len(prediction_override) != T:
        raise ValueError("prediction_override must have one value per round")

    w = np.zeros(d)
    masks = np.zeros((T, d), dtype=bool)
    history = np.zeros((T + 1, d)) if keep_weights else None
    trace = RunTrace(kind=kind.value, gravity=params.gravity.g_values[:T].copy())
    for t in range(1, T + 1):
        x, yt = X[t - 1], float(y[t - 1])
        check_label(kind, yt)
        y_hat = float(w @ x)
        pred = y_hat if prediction_override is None else float(prediction_override[t - 1])
        s = loss_grad_scalar(kind, pred, yt, params.step_factor)
        w = w + (params.eta * s) * x
        alpha = params.alpha(t)
        if alpha > 0:
            w = truncate_vector(w, alpha, params.theta)
        masks[t - 1] = np.abs(w) <= params.theta
        if history is not None:
            history[t] = w
        q = masked_l1(w, params.theta)
        trace.rows.append(TraceRow(t=t, y=yt, y_tilde=pred, loss=loss_value(kind, pred, yt),
                                   q_tilde=q, y_hat=y_hat, q=q, nnz=int(np.count_nonzero(w))))
    trace.masks = masks
    trace.final_weights = w
    trace.weight_history = history
    return trace
