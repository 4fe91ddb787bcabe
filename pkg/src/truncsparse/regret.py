"""Regret quantities, the best fixed comparator, theorem bounds and sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from .data import Dataset, DatasetSpec, synth_dataset
from .engine import EngineParams, run_quantum_emulated, theorem_presets
from .losses import ProblemKind, loss_constants, loss_value
from .trace import RunTrace
from .truncation import TruncationParams, classical_online_run


@dataclass
class ComparatorResult:
    u_star: np.ndarray
    total_loss: float
    method: str
    converged: bool


@dataclass
class RegretReport:
    lhs: float
    rhs: float
    comparator_norm: float
    held: bool
    loss_series: np.ndarray = field(repr=False, default=None)
    penalty_series: np.ndarray = field(repr=False, default=None)
    max_pred_error: Optional[float] = None
    assumption_violated: bool = False

    def as_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "comparator_norm": self.comparator_norm,
                "held": self.held, "max_pred_error": self.max_pred_error,
                "assumption_violated": self.assumption_violated}


# --- comparator ----------------------------------------------------------------

def _losses(kind: ProblemKind, margins: np.ndarray, y: np.ndarray) -> np.ndarray:
    if kind is ProblemKind.LOGISTIC:
        return np.logaddexp(0.0, -y * margins)
    if kind is ProblemKind.HINGE:
        return np.maximum(0.0, 1.0 - y * margins)
    return (margins - y) ** 2


def total_loss(kind: ProblemKind | str, u: np.ndarray, data: Dataset) -> float:
    kind = ProblemKind.parse(kind)
    return float(_losses(kind, data.X @ u, data.y).sum())


def best_fixed_comparator(kind: ProblemKind | str, data: Dataset,
                          max_iter: int = 100_000) -> ComparatorResult:
    """Minimiser of the plain total loss over the whole stream.

    Squared loss: minimum-norm least squares. Logistic: L-BFGS on the total
    loss. Hinge: the equivalent linear program (slack per example).
    """
    kind = ProblemKind.parse(kind)
    X, y = data.X, data.y
    T, d = X.shape
    if kind is ProblemKind.SQUARED:
        u, *_ = np.linalg.lstsq(X, y, rcond=None)
        grad = X.T @ (X @ u - y)
        # absolute floor covers X^T y = 0, where the relative test is meaningless
        tol = 1e-8 * np.linalg.norm(X.T @ y) + 1e-12 * np.linalg.norm(X) * np.linalg.norm(y)
        ok = np.linalg.norm(grad) <= tol
        return ComparatorResult(u, total_loss(kind, u, data), "normal_equations", bool(ok))

    if kind is ProblemKind.LOGISTIC:
        def fun(u):
            m = y * (X @ u)
            val = np.logaddexp(0.0, -m).sum()
            # d/dm ln(1+e^-m) = -sigmoid(-m)
            s = np.exp(-np.logaddexp(0.0, m))
            return val, -(X.T @ (y * s))

        res = optimize.minimize(fun, np.zeros(d), jac=True, method="L-BFGS-B",
                                options={"maxiter": max_iter, "gtol": 1e-12, "ftol": 1e-15})
        u = res.x
        val, g = fun(u)
        ok = np.linalg.norm(g) <= 1e-8 * max(1.0, val)
        return ComparatorResult(u, float(val), "batch_descent", bool(ok))

    # hinge: min sum xi  s.t.  xi_t >= 1 - y_t x_t.u,  xi >= 0
    c = np.concatenate([np.zeros(d), np.ones(T)])
    A = np.hstack([-(y[:, None] * X), -np.eye(T)])
    bounds = [(None, None)] * d + [(0, None)] * T
    res = optimize.linprog(c, A_ub=A, b_ub=-np.ones(T), bounds=bounds, method="highs")
    if res.status != 0:
        return ComparatorResult(np.zeros(d), total_loss(kind, np.zeros(d), data), "linear_program", False)
    u = res.x[:d]
    return ComparatorResult(u, total_loss(kind, u, data), "linear_program", True)


# --- theorem quantities ------------------------------------------------------------

def theorem_rhs(kind: ProblemKind | str, rounds: int, c_bound: float, g_max: float,
                u_norm2: float, d_bound: Optional[float] = None) -> float:
    kind = ProblemKind.parse(kind)
    C2, sqrt_t = c_bound**2, math.sqrt(rounds)
    if kind is ProblemKind.LOGISTIC:
        return (1.0 + C2 * (2.0 + g_max + u_norm2**2)) / (2.0 * sqrt_t)
    if kind is ProblemKind.HINGE:
        return (2.0 + C2 * (g_max + u_norm2**2)) / (2.0 * sqrt_t)
    if d_bound is None:
        raise ValueError("squared loss needs the prediction-error bound D")
    return C2 * (c_bound * d_bound + g_max + u_norm2**2) / sqrt_t


def _u_penalties(trace: RunTrace, u: np.ndarray) -> np.ndarray:
    if trace.masks is None:
        raise ValueError("trace has no audit data (truncation masks)")
    return (np.abs(u)[None, :] * trace.masks).sum(axis=1)


def q_series(trace: RunTrace, kind: ProblemKind | str) -> np.ndarray:
    """Estimated masked norms in the index convention of each theorem.

    Logistic pairs round ``t`` with the estimate for ``w^(t)`` (zero at
    ``t = 1``); hinge and squared pair it with the estimate for ``w^(t+1)``.
    """
    q_next = trace.column("q_tilde")
    if ProblemKind.parse(kind) is ProblemKind.LOGISTIC:
        return np.concatenate([[0.0], q_next[:-1]])
    return q_next


def regularized_regret_lhs(trace: RunTrace, u: np.ndarray, data: Dataset,
                           kind: ProblemKind | str | None = None) -> float:
    kind = ProblemKind.parse(kind or trace.kind)
    T = len(trace)
    u = np.asarray(u, dtype=float)
    y = trace.column("y")
    g = trace.gravity[:T]
    learner = np.mean(trace.column("loss")) + np.mean(g * q_series(trace, kind))
    fixed = np.mean(_losses(kind, data.X[:T] @ u, y)) + np.mean(g * _u_penalties(trace, u))
    return float(learner - fixed)


def theorem_report(trace: RunTrace, data: Dataset, comparator: ComparatorResult,
                   c_bound: float, d_bound: Optional[float] = None) -> RegretReport:
    """LHS vs RHS of the regret theorem for the trace's loss.

    For squared loss the observed ``max_t |y - y_hat|`` is used as ``D``
    when none is given; a given ``D`` below it marks the assumption violated.
    """
    kind = ProblemKind.parse(trace.kind)
    T = len(trace)
    u = comparator.u_star
    lhs = regularized_regret_lhs(trace, u, data, kind)
    unorm = float(np.linalg.norm(u))
    max_err, violated = None, False
    if kind is ProblemKind.SQUARED:
        if not trace.audited:
            raise ValueError("squared-loss report needs an audited trace")
        max_err = float(np.max(np.abs(trace.column("y") - trace.column("y_hat"))))
        if d_bound is None:
            d_bound = max_err
        violated = max_err > d_bound
    rhs = theorem_rhs(kind, T, c_bound, float(np.max(trace.gravity[:T])), unorm, d_bound)
    return RegretReport(lhs, rhs, unorm, lhs <= rhs, trace.column("loss"),
                        trace.gravity[:T] * q_series(trace, kind), max_err, violated)


def fact_c1_check(trace: RunTrace, u: np.ndarray, data: Dataset, params: TruncationParams,
                  c_bound: Optional[float] = None) -> RegretReport:
    """Both sides of the classical truncated-gradient regret inequality.

    The trace must come from an exact run (predictions equal ``w.x``). For
    logistic loss with ``step_factor != 1`` the run is truncated gradient
    descent with rate ``step_factor*eta`` and gravity ``g/step_factor``, and
    the inequality is evaluated with those effective values.
    """
    kind = ProblemKind.parse(trace.kind)
    if params.period_k != 1:
        raise ValueError("the inequality covers per-round truncation only")
    T = len(trace)
    X = data.X[:T]
    C = c_bound if c_bound is not None else float(np.linalg.norm(X, axis=1).max())
    consts = loss_constants(kind, max(C, 1e-300))
    eta, g = params.eta, trace.gravity[:T]
    if kind is ProblemKind.LOGISTIC:
        eta, g = eta * params.step_factor, g / params.step_factor
    u = np.asarray(u, dtype=float)
    y = trace.column("y")
    L_w = _losses(kind, trace.column("y_hat"), y)
    q = trace.column("q")
    pre = 1.0 - 0.5 * consts.a_const * eta
    lhs = float(np.mean(pre * L_w + g * q))
    rhs = float(eta / 2.0 * consts.b_const + u @ u / (2.0 * eta * T)
                + np.mean(_losses(kind, X @ u, y) + g * _u_penalties(trace, u)))
    return RegretReport(lhs, rhs, float(np.linalg.norm(u)), lhs <= rhs, L_w, g * q)


# --- experiments ---------------------------------------------------------------------

@dataclass
class ExperimentSetup:
    kind: ProblemKind
    dimension: int = 50
    c_bound: float = 1.0
    delta: float = 0.1
    gravity: float = 0.1
    theta: float = 1.0
    informative_fraction: float = 0.1
    noise: float = 0.1
    weight_scale: float = 3.0
    mode: str = "quantum"        # "quantum" | "classical"
    step_factor: float = 2.0

    def __post_init__(self):
        self.kind = ProblemKind.parse(self.kind)
        if self.mode not in ("quantum", "classical"):
            raise ValueError("mode must be 'quantum' or 'classical'")

    def dataset_spec(self, rounds: int) -> DatasetSpec:
        return DatasetSpec(dimension=self.dimension, rounds=rounds,
                           informative_fraction=self.informative_fraction, noise=self.noise,
                           weight_scale=self.weight_scale, c_bound=self.c_bound)


def run_once(setup: ExperimentSetup, rounds: int, seed: int) -> tuple[RunTrace, Dataset, EngineParams]:
    rng = np.random.default_rng(seed)
    data = synth_dataset(setup.dataset_spec(rounds), setup.kind, rng)
    params = theorem_presets(setup.kind, rounds, setup.c_bound, setup.delta, gravity=setup.gravity,
                             theta=setup.theta, seed=seed, step_factor=setup.step_factor,
                             dimension=setup.dimension)
    if setup.mode == "classical":
        trace = classical_online_run(setup.kind, data, params.trunc)
    else:
        trace = run_quantum_emulated(params, data, np.random.default_rng([seed, 1]), audit=True)
    return trace, data, params


def _trial(args) -> dict:
    setup, rounds, seed = args
    trace, data, _ = run_once(setup, rounds, seed)
    comp = best_fixed_comparator(setup.kind, data)
    rep = theorem_report(trace, data, comp, setup.c_bound)
    out = rep.as_dict()
    out.update(rounds=rounds, seed=seed, comparator_converged=comp.converged)
    return out


def _map(fn, tasks, workers: int):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def bound_holding(setup: ExperimentSetup, rounds: int, seeds: Sequence[int],
                  workers: int = 1) -> dict:
    """Fraction of seeded runs whose theorem LHS is within the RHS."""
    results = _map(_trial, [(setup, rounds, s) for s in seeds], workers)
    held = [r["held"] for r in results]
    return {"kind": setup.kind.value, "rounds": rounds, "n": len(held),
            "fraction_held": float(np.mean(held)), "runs": results}


@dataclass
class ScalingResult:
    kind: str
    mode: str
    rounds: list[int]
    medians: list[float]
    slope: Optional[float]
    degenerate: bool
    lhs: dict[int, list[float]]

    def as_dict(self) -> dict:
        return {"kind": self.kind, "mode": self.mode, "rounds": self.rounds,
                "medians": self.medians, "slope": self.slope, "degenerate": self.degenerate,
                "lhs": {str(k): v for k, v in self.lhs.items()}}

    def to_csv(self) -> str:
        lines = ["rounds,median_positive_lhs"]
        lines += [f"{t},{m!r}" for t, m in zip(self.rounds, self.medians)]
        return "\n".join(lines) + "\n"


POSITIVE_FLOOR = 1e-12


def fit_slope(rounds: Sequence[int], medians: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log(median) against log(T); None if degenerate."""
    m = np.asarray(medians, dtype=float)
    if np.all(m <= POSITIVE_FLOOR) or np.ptp(np.log(m)) == 0.0:
        return None
    slope, _ = np.polyfit(np.log(np.asarray(rounds, dtype=float)), np.log(m), 1)
    return float(slope)


def scaling_from_lhs(kind: str, mode: str, lhs: dict[int, list[float]]) -> ScalingResult:
    rounds = sorted(lhs)
    medians = [float(np.median(np.maximum(lhs[t], POSITIVE_FLOOR))) for t in rounds]
    slope = fit_slope(rounds, medians)
    return ScalingResult(kind, mode, rounds, medians, slope, slope is None, lhs)


def scaling_experiment(setup: ExperimentSetup, rounds_grid: Sequence[int] = (64, 256, 1024, 4096),
                       seeds: Sequence[int] = range(50), workers: int = 1) -> ScalingResult:
    tasks = [(setup, t, s) for t in rounds_grid for s in seeds]
    results = _map(_trial, tasks, workers)
    lhs: dict[int, list[float]] = {t: [] for t in rounds_grid}
    for r in results:
        lhs[r["rounds"]].append(r["lhs"])
    return scaling_from_lhs(setup.kind.value, setup.mode, lhs)
