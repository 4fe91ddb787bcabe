"""Weight entries recomputed on demand from the scalar round history.

No ``d``-dimensional weight vector is kept: ``w_j^(t)`` is rebuilt by
replaying the update for coordinate ``j`` over rounds ``1..t-1``, reading
exactly one feature value per round through an instrumented accessor.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .losses import ProblemKind, check_label, loss_grad_scalar
from .truncation import TruncationParams, truncate_vector


@dataclass(frozen=True)
class RoundRecord:
    t: int
    y: float
    y_tilde: float
    g: float


class ExampleAccess:
    """Feature reads ``x_j^(s)`` with a read counter.

    Examples arrive one at a time through :meth:`append`. ``track_coords``
    additionally records which coordinates were touched.
    """

    def __init__(self, dim: int, capacity: int = 16, track_coords: bool = False):
        self.dim = dim
        self._X = np.empty((capacity, dim))
        self._n = 0
        self.reads = 0
        self.track_coords = track_coords
        self.coords_read: set[int] = set()

    @classmethod
    def from_matrix(cls, X: np.ndarray, **kw) -> "ExampleAccess":
        acc = cls(X.shape[1], capacity=max(1, X.shape[0]), **kw)
        for x in X:
            acc.append(x)
        return acc

    def __len__(self) -> int:
        return self._n

    def append(self, x: np.ndarray) -> None:
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.dim:
            raise ValueError(f"example has dimension {x.size}, expected {self.dim}")
        if self._n == self._X.shape[0]:
            grown = np.empty((2 * self._X.shape[0], self.dim))
            grown[: self._n] = self._X[: self._n]
            self._X = grown
        self._X[self._n] = x
        self._n += 1

    def read(self, s: int, j: int) -> float:
        if not 1 <= s <= self._n:
            raise IndexError(f"round {s} not available (have {self._n})")
        self.reads += 1
        if self.track_coords:
            self.coords_read.add(j)
        return float(self._X[s - 1, j])

    def read_row(self, s: int) -> np.ndarray:
        """All ``d`` features of round ``s``; counted as ``d`` reads."""
        if not 1 <= s <= self._n:
            raise IndexError(f"round {s} not available (have {self._n})")
        self.reads += self.dim
        if self.track_coords:
            self.coords_read.update(range(self.dim))
        return self._X[s - 1]

    def reset_counter(self) -> None:
        self.reads = 0
        self.coords_read.clear()


class LazyWeightOracle:
    """History of ``(y, y_tilde, g)`` per round plus on-demand weights.

    With ``cache=True`` the most recently computed full vector is kept so a
    run that asks for ``w^(1), w^(2), ...`` in order pays ``d`` reads per new
    round instead of ``d*(t-1)``. Leave it off when counting reads.
    """

    def __init__(self, kind: ProblemKind | str, params: TruncationParams,
                 access: ExampleAccess, cache: bool = False):
        self.kind = ProblemKind.parse(kind)
        self.params = params
        self.access = access
        self.history: list[RoundRecord] = []
        self._steps: list[float] = []      # eta * s^(s) per round
        self._alphas: list[float] = []     # truncation shrinkage per round
        self.cache = cache
        self._cached_t = 0
        self._cached_w: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.access.dim

    @property
    def rounds(self) -> int:
        return len(self.history)

    def record_round(self, y: float, y_tilde: float, g: float) -> None:
        check_label(self.kind, y)
        if g < 0:
            raise ValueError("gravity must be nonnegative")
        t = len(self.history) + 1
        self.history.append(RoundRecord(t, float(y), float(y_tilde), float(g)))
        s = loss_grad_scalar(self.kind, y_tilde, y, self.params.step_factor)
        self._steps.append(self.params.eta * s)
        self._alphas.append(0.0 if t % self.params.period_k else g * self.params.eta)

    def _check_t(self, t: int) -> None:
        if not 1 <= t <= len(self.history) + 1:
            raise IndexError(f"round {t} out of range 1..{len(self.history) + 1}")

    def weight_entry(self, t: int, j: int) -> float:
        """``w_j^(t)`` (``t`` 1-based, ``j`` 0-based); costs ``t - 1`` reads."""
        self._check_t(t)
        if not 0 <= j < self.dim:
            raise IndexError(f"coordinate {j} out of range 0..{self.dim - 1}")
        if self.cache and self._cached_w is not None and t == self._cached_t:
            return float(self._cached_w[j])
        theta = self.params.theta
        w = 0.0
        read = self.access.read
        for s in range(1, t):
            w = w + self._steps[s - 1] * read(s, j)
            a = self._alphas[s - 1]
            if a > 0:
                if 0.0 <= w <= theta:
                    w = max(w - a, 0.0)
                elif -theta <= w <= 0.0:
                    w = min(w + a, 0.0)
        return w

    def weight_vector(self, t: int) -> np.ndarray:
        """``w^(t)`` for all coordinates; ``d*(t-1)`` reads without the cache."""
        self._check_t(t)
        start, w = 1, np.zeros(self.dim)
        if self.cache and self._cached_w is not None and self._cached_t <= t:
            start, w = self._cached_t, self._cached_w.copy()
        for s in range(start, t):
            w = w + self._steps[s - 1] * self.access.read_row(s)
            a = self._alphas[s - 1]
            if a > 0:
                w = truncate_vector(w, a, self.params.theta)
        if self.cache:
            self._cached_t, self._cached_w = t, w.copy()
        return w

    def history_json(self) -> str:
        return json.dumps([asdict(r) for r in self.history])

    def replay_history(self, records: list[dict]) -> None:
        for r in records:
            self.record_round(r["y"], r["y_tilde"], r["g"])
