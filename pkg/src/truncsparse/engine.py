"""The emulated quantum online learner.

Per round ``t``: estimate the prediction ``w^(t).x^(t)`` with the
inner-product emulator (weights come from the lazy oracle), receive the
label, append the round to the oracle history, draw a state-preparation
sample from ``w^(t+1)`` and estimate the masked norm
``||w^(t+1) * I(|w^(t+1)| <= theta)||_1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional

import numpy as np

from .data import Dataset, Example, as_arrays
from .emulation import (EstimatorSpec, QueryLedger, VectorAccess, est_inner_product,
                        est_l1_norm, prep_queries, sample_index, theorem_closed_form)
from .lazy_oracle import ExampleAccess, LazyWeightOracle
from .losses import ProblemKind, check_label, loss_value
from .trace import RunTrace, TraceRow
from .truncation import GravitySchedule, TruncationParams, masked_l1


@dataclass(frozen=True)
class EngineParams:
    kind: ProblemKind
    trunc: TruncationParams
    est: EstimatorSpec
    t_rounds: int
    dimension: Optional[int] = None
    c_bound: float = 1.0
    preset_source: str = "manual"       # "theorem" | "manual"

    def __post_init__(self):
        object.__setattr__(self, "kind", ProblemKind.parse(self.kind))
        if self.t_rounds < 1:
            raise ValueError("t_rounds must be >= 1")
        if len(self.trunc.gravity) < self.t_rounds:
            raise ValueError("gravity schedule shorter than t_rounds")
        if self.preset_source not in ("theorem", "manual"):
            raise ValueError("preset_source must be 'theorem' or 'manual'")

    @property
    def per_call_delta(self) -> float:
        return self.est.per_call_delta(self.t_rounds)

    def closed_form_queries(self, d: int, ledger: Optional[QueryLedger] = None) -> float:
        return theorem_closed_form(self.t_rounds, d, self.est.delta, self.est.eps_ip,
                                   self.est.eps_norm, ledger)


def theorem_presets(kind: ProblemKind | str, rounds: int, c_bound: float, delta: float, *,
                    gravity: float = 0.1, theta: float = 1.0, zeta: float = 0.1,
                    seed: int = 0, step_factor: float = 2.0,
                    hinge_eta: str = "proof", logistic_eps_ip: str = "statement",
                    dimension: Optional[int] = None) -> EngineParams:
    """Learning rate and estimator accuracies prescribed by the regret theorems.

    All three problems use ``eta = 1/(C^2 sqrt(T))`` by default. For hinge
    loss ``hinge_eta="statement"`` selects ``1/(C^2 T^2)`` instead. For
    logistic loss ``logistic_eps_ip="proof"`` selects ``1/(4 eta T)`` instead
    of ``1/(2 sqrt(T))``.
    """
    kind = ProblemKind.parse(kind)
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if not c_bound > 0:
        raise ValueError("c_bound must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    sqrt_t = math.sqrt(rounds)
    eta = 1.0 / (c_bound**2 * sqrt_t)
    eps_ip = 1.0 / (2.0 * sqrt_t)
    if kind is ProblemKind.HINGE:
        if hinge_eta == "statement":
            eta = 1.0 / (c_bound**2 * rounds**2)
        elif hinge_eta != "proof":
            raise ValueError("hinge_eta must be 'proof' or 'statement'")
        eps_norm = 1.0 / (2.0 * sqrt_t)
    else:
        eps_norm = 1.0 / (2.0 * eta * rounds)
        if kind is ProblemKind.LOGISTIC and logistic_eps_ip == "proof":
            eps_ip = 1.0 / (4.0 * eta * rounds)
        elif logistic_eps_ip not in ("statement", "proof"):
            raise ValueError("logistic_eps_ip must be 'statement' or 'proof'")
    trunc = TruncationParams(theta=theta, eta=eta, gravity=GravitySchedule.constant(gravity, rounds),
                             step_factor=step_factor)
    est = EstimatorSpec(eps_ip=eps_ip, eps_norm=eps_norm, zeta=zeta, delta=delta, rng_seed=seed)
    return EngineParams(kind, trunc, est, rounds, dimension, c_bound, "theorem")


def _weights_access(oracle: LazyWeightOracle, t: int, query_cost: float,
                    theta: Optional[float] = None) -> VectorAccess:
    def bulk():
        w = oracle.weight_vector(t)
        if theta is not None:
            w = np.where(np.abs(w) <= theta, w, 0.0)
        return w

    def reader(j):
        w = oracle.weight_entry(t, j)
        return w if theta is None or abs(w) <= theta else 0.0

    return VectorAccess(oracle.dim, reader, bulk, query_cost)


def run_quantum_emulated(params: EngineParams, stream: Dataset | Iterable[Example],
                         rng: Optional[np.random.Generator] = None, *, audit: bool = False,
                         cache: bool = True, ledger: Optional[QueryLedger] = None,
                         norm_tol: float = 1e-9) -> RunTrace:
    """Run the emulated learner for ``params.t_rounds`` rounds.

    ``rng`` defaults to one seeded from ``params.est.rng_seed``. With
    ``audit=True`` the exact prediction, masked norm, nnz and truncation
    masks are recorded alongside the estimates; the estimates themselves
    are unaffected. ``cache=False`` forces every weight query to replay the
    full history.
    """
    X, y = as_arrays(stream)
    T = params.t_rounds
    if X.shape[0] < T:
        raise ValueError(f"stream has {X.shape[0]} rounds, need {T}")
    if params.dimension is not None and X.shape[1] != params.dimension:
        raise ValueError(f"stream dimension {X.shape[1]} != {params.dimension}")
    norms = np.linalg.norm(X[:T], axis=1)
    if norms.max() > params.c_bound * (1 + norm_tol):
        t_bad = int(np.argmax(norms > params.c_bound * (1 + norm_tol))) + 1
        raise ValueError(f"example {t_bad} has norm {norms[t_bad - 1]:.6g} > C = {params.c_bound}")

    kind, trunc, est = params.kind, params.trunc, params.est
    rng = rng if rng is not None else np.random.default_rng(est.rng_seed)
    theorem_mode = params.preset_source == "theorem"
    if ledger is None:
        ledger = QueryLedger(norm_model="unit" if theorem_mode else "data")
    d = X.shape[1]
    delta_call = params.per_call_delta
    access = ExampleAccess(d, capacity=T)
    oracle = LazyWeightOracle(kind, trunc, access, cache=cache)
    trace = RunTrace(kind=kind.value, gravity=trunc.gravity.g_values[:T].copy(),
                     rng_seed=est.rng_seed)
    masks = np.zeros((T, d), dtype=bool) if audit else None

    for t in range(1, T + 1):
        x_t, y_t = X[t - 1], float(y[t - 1])
        access.append(x_t)
        # weight queries cost t-1 example reads; the theorem accounting bounds this by T
        w_cost = float(T) if theorem_mode else float(max(t - 1, 1))
        events: list = []
        y_tilde = est_inner_product(_weights_access(oracle, t, w_cost), VectorAccess.of(x_t),
                                    est.eps_ip, delta_call, rng, ledger, t=t,
                                    noiseless=est.noiseless, events=events)
        y_hat = float(oracle.weight_vector(t) @ x_t) if audit else None
        check_label(kind, y_t)
        g_t = trunc.gravity[t]
        oracle.record_round(y_t, y_tilde, g_t)

        next_cost = float(T) if theorem_mode else float(t)
        w_next = _weights_access(oracle, t + 1, next_cost)
        w_vals = w_next.values()
        if np.any(w_vals != 0.0):
            j = sample_index(w_next, est.zeta, delta_call, rng, ledger, t=t, events=events)
        else:
            # nothing to prepare; the attempt is still charged
            ledger.charge("state_prep", prep_queries(d, delta_call, ledger.c_prep) * next_cost, t)
            j = None
        q_tilde = est_l1_norm(_weights_access(oracle, t + 1, next_cost, theta=trunc.theta),
                              delta_call, rng, ledger, eps_add=est.eps_norm, t=t,
                              noiseless=est.noiseless, events=events)
        row = TraceRow(t=t, y=y_t, y_tilde=y_tilde, loss=loss_value(kind, y_tilde, y_t),
                       q_tilde=q_tilde, sampled_index=j,
                       ip_failed=dict(events).get("inner_product"),
                       norm_failed=dict(events).get("l1_norm"))
        if audit:
            row.y_hat = y_hat
            row.q = masked_l1(w_vals, trunc.theta)
            row.nnz = int(np.count_nonzero(w_vals))
            masks[t - 1] = np.abs(w_vals) <= trunc.theta
        trace.rows.append(row)

    trace.ledger = ledger
    if audit:
        trace.masks = masks
        trace.final_weights = oracle.weight_vector(T + 1)
    return trace


def audit_mode(params: EngineParams, stream: Dataset | Iterable[Example],
               rng: Optional[np.random.Generator] = None, **kw) -> RunTrace:
    return run_quantum_emulated(params, stream, rng, audit=True, **kw)


def with_noise_disabled(params: EngineParams) -> EngineParams:
    return replace(params, est=replace(params.est, noiseless=True))
