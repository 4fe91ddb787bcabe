"""The nine acceptance checks, each returning a :class:`CriterionResult`.

``quick=True`` shrinks rounds and seed counts so the whole suite runs in
well under a minute; the full settings are the target ones.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .circuits import (FixedPointFormat, ToffoliModel, between_oracle, exhaustive_truncation,
                       random_circuit, random_state, reversibility_check)
from .data import DatasetSpec, synth_dataset
from .emulation import ae_emulate, est_inner_product, ledger_total, theorem_closed_form
from .engine import run_quantum_emulated, theorem_presets
from .lazy_oracle import ExampleAccess, LazyWeightOracle
from .losses import ProblemKind
from .regret import (ExperimentSetup, best_fixed_comparator, bound_holding, fact_c1_check,
                     scaling_experiment)
from .truncation import GravitySchedule, TruncationParams, classical_online_run, truncate_entry

KINDS = tuple(ProblemKind)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number}. {self.name} ({self.seconds:.1f}s)"

    def as_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "seconds": self.seconds, "detail": self.detail}


def _timed(number: int, name: str, fn: Callable[[], tuple[bool, dict]]) -> CriterionResult:
    t0 = time.perf_counter()
    ok, detail = fn()
    return CriterionResult(number, name, bool(ok), detail, time.perf_counter() - t0)


# --- 1 ---------------------------------------------------------------------------

TRUNCATION_SETTINGS = ((0.25, 1.0), (0.5, 2.0), (0.0, 1.0), (1.0, 0.5), (0.0390625, 7.0))


def truncation_exhaustive(quick: bool = False) -> CriterionResult:
    def run():
        fmt = FixedPointFormat(k=12, f=8)
        settings = TRUNCATION_SETTINGS[:2] if quick else TRUNCATION_SETTINGS
        mismatches = dirty = 0
        t0 = time.perf_counter()
        for alpha, theta in settings:
            for raw, res in zip(fmt.all_raw(), exhaustive_truncation(fmt, alpha, theta)):
                want = truncate_entry(fmt.decode(raw), alpha, theta)
                mismatches += res.output != want or res.overflow
                dirty += not (res.ancilla_clean and res.params_preserved)
        elapsed = time.perf_counter() - t0
        return (mismatches == 0 and dirty == 0 and elapsed < 30.0,
                {"settings": len(settings), "inputs": len(settings) << 12,
                 "mismatches": mismatches, "dirty": dirty, "seconds": elapsed})
    return _timed(1, "truncation circuit matches truncate_entry exhaustively", run)


# --- 2 ---------------------------------------------------------------------------

def lazy_oracle_equivalence(quick: bool = False) -> CriterionResult:
    d, T = 50, (60 if quick else 200)
    seeds = range(3 if quick else 10)

    def run():
        worst, bad_reads, checked = 0.0, 0, 0
        for kind in KINDS:
            for seed in seeds:
                rng = np.random.default_rng(seed)
                data = synth_dataset(DatasetSpec(dimension=d, rounds=T), kind, rng)
                params = theorem_presets(kind, T, 1.0, 0.1, seed=seed, dimension=d)
                driven = run_quantum_emulated(params, data, np.random.default_rng([seed, 2]))
                y_tilde = driven.column("y_tilde")
                dense = classical_online_run(kind, data, params.trunc, prediction_override=y_tilde,
                                             keep_weights=True)
                access = ExampleAccess.from_matrix(data.X)
                oracle = LazyWeightOracle(kind, params.trunc, access, cache=False)
                for row in driven.rows:
                    oracle.record_round(row.y, row.y_tilde, params.trunc.gravity[row.t])
                for t in range(1, T + 2):
                    for j in range(d):
                        access.reset_counter()
                        w = oracle.weight_entry(t, j)
                        bad_reads += access.reads != t - 1
                        worst = max(worst, abs(w - dense.weight_history[t - 1, j]))
                        checked += 1
        return worst <= 1e-9 and bad_reads == 0, {"max_abs_deviation": worst,
                                                   "read_count_mismatches": bad_reads,
                                                   "entries_checked": checked}
    return _timed(2, "lazy weight oracle equals the dense run", run)


# --- 3 ---------------------------------------------------------------------------

def estimator_contracts(quick: bool = False) -> CriterionResult:
    def run():
        rng = np.random.default_rng(2024)
        d, eps, delta = 512, 0.05, 0.05
        trials = 300 if quick else 1000
        fails = 0
        for _ in range(trials):
            u, v = rng.normal(size=d), rng.normal(size=d)
            u /= np.linalg.norm(u)
            v /= np.linalg.norm(v)
            est = est_inner_product(u, v, eps, delta, rng)
            fails += abs(est - float(u @ v)) > eps
        fail_frac = fails / trials

        n = 20_000 if quick else 100_000
        draws = ae_emulate(0.3, 64, 1e-3, rng, size=n)
        mean, var = float(draws.mean()), float(draws.var(ddof=1))
        # standard error of the sample variance
        se_var = math.sqrt(max(float(np.mean((draws - mean) ** 4)) - var**2, 0.0) / n)
        var_cap = 91 * 0.3 / 4096 + 1e-3 + 3 * se_var
        ok = fail_frac <= 0.08 and abs(mean - 0.3) <= 2e-3 and var <= var_cap
        return ok, {"ip_failure_fraction": fail_frac, "ae_mean": mean, "ae_variance": var,
                    "ae_variance_cap": var_cap}
    return _timed(3, "estimator contracts", run)


# --- 4 ---------------------------------------------------------------------------

def theorem_bounds(quick: bool = False, workers: int = 1) -> CriterionResult:
    rounds_list = (256,) if quick else (256, 1024)
    d = 50 if quick else 200
    seeds = range(20 if quick else 100)

    def run():
        fractions = {}
        for kind in KINDS:
            setup = ExperimentSetup(kind=kind, dimension=d, c_bound=1.0, delta=0.1, gravity=0.1)
            for T in rounds_list:
                res = bound_holding(setup, T, seeds, workers)
                fractions[f"{kind.value}@{T}"] = res["fraction_held"]
        return min(fractions.values()) >= 0.85, {"fraction_held": fractions, "seeds": len(seeds)}
    return _timed(4, "regret theorems hold at the theorem presets", run)


# --- 5 ---------------------------------------------------------------------------

def scaling_setup(kind: ProblemKind, mode: str) -> ExperimentSetup:
    """Low-dimensional noisy data with a small comparator norm.

    With ``||u*||`` of order one the O(1/sqrt(T)) regime is reached within a
    few thousand rounds; the small gravity keeps the comparator's own
    penalty from dominating the regret.
    """
    return ExperimentSetup(kind=kind, dimension=5, informative_fraction=0.3, noise=0.5,
                           weight_scale=1.0, gravity=0.01, mode=mode)


def regret_scaling(quick: bool = False, workers: int = 1) -> CriterionResult:
    grid = (64, 256, 1024) if quick else (64, 256, 1024, 4096)
    seeds = range(10 if quick else 50)

    def run():
        slopes, ok = {}, True
        for kind in KINDS:
            for mode in ("classical", "quantum"):
                res = scaling_experiment(scaling_setup(kind, mode), grid, seeds, workers)
                slopes[f"{kind.value}/{mode}"] = res.slope
                ok &= res.slope is not None and -0.75 <= res.slope <= -0.25
        return ok, {"slopes": slopes, "rounds": list(grid), "seeds": len(seeds)}
    return _timed(5, "regret decays like 1/sqrt(T)", run)


# --- 6 ---------------------------------------------------------------------------

def truncated_gd_inequality(quick: bool = False) -> CriterionResult:
    n = 20 if quick else 100

    def run():
        held, total, worst_gap = 0, 0, -math.inf
        for kind in KINDS:
            for i in range(n):
                rng = np.random.default_rng([6, i, KINDS.index(kind)])
                d = int(rng.integers(2, 51))
                T = int(rng.integers(10, 501))
                c_bound = float(rng.uniform(0.5, 2.0))
                spec = DatasetSpec(dimension=d, rounds=T, informative_fraction=float(rng.uniform(0.05, 1.0)),
                                   noise=float(rng.uniform(0.0, 1.0)), c_bound=c_bound)
                data = synth_dataset(spec, kind, rng)
                # keep 0.5*A*eta < 1 for squared loss
                eta = float(rng.uniform(0.01, 0.9)) / (4 * c_bound**2)
                g = rng.uniform(0.0, 0.5, size=T)
                params = TruncationParams(theta=float(rng.uniform(0.1, 3.0)), eta=min(eta, 0.99),
                                          gravity=GravitySchedule(g, float(g.max())))
                trace = classical_online_run(kind, data, params)
                candidates = [np.zeros(d), rng.normal(size=d), best_fixed_comparator(kind, data).u_star]
                for u in candidates:
                    rep = fact_c1_check(trace, u, data, params, c_bound)
                    held += rep.held
                    total += 1
                    worst_gap = max(worst_gap, rep.lhs - rep.rhs)
        return held == total, {"held": held, "instances": total, "max_lhs_minus_rhs": worst_gap}
    return _timed(6, "classical truncated-gradient inequality", run)


# --- 7 ---------------------------------------------------------------------------

def ledger_identity(quick: bool = False) -> CriterionResult:
    def run():
        d, delta = 32, 0.1
        totals, exact = {}, True
        for T in (4, 16):
            for kind in KINDS:
                params = theorem_presets(kind, T, 1.0, delta, dimension=d)
                data = synth_dataset(DatasetSpec(dimension=d, rounds=T), kind, np.random.default_rng(T))
                trace = run_quantum_emulated(params, data)
                got = ledger_total(trace.ledger)
                want = theorem_closed_form(T, d, delta, params.est.eps_ip, params.est.eps_norm, trace.ledger)
                exact &= math.isclose(got, want, rel_tol=1e-12)
                if kind is ProblemKind.LOGISTIC:
                    totals[T] = got
        ratio = totals[16] / totals[4]
        target = 4**2.5 * math.log(48 / delta) / math.log(12 / delta)
        rel = ratio / target
        return exact and 0.8 <= rel <= 1.2, {"closed_form_exact": exact, "ratio": ratio,
                                              "target": target, "ratio_over_target": rel}
    return _timed(7, "query ledger matches the closed form", run)


# --- 8 ---------------------------------------------------------------------------

def sparsity_effect(quick: bool = False) -> CriterionResult:
    d, T = (200, 400) if quick else (500, 1000)
    seeds = range(5 if quick else 20)

    def run():
        sparser = 0
        pairs = []
        for seed in seeds:
            data = synth_dataset(DatasetSpec(dimension=d, rounds=T, informative_fraction=0.1),
                                 ProblemKind.SQUARED, np.random.default_rng(seed))
            nnz = []
            for g in (0.1, 0.0):
                params = theorem_presets(ProblemKind.SQUARED, T, 1.0, 0.1, gravity=g, dimension=d)
                nnz.append(int(np.count_nonzero(
                    classical_online_run(ProblemKind.SQUARED, data, params.trunc).final_weights)))
            pairs.append(nnz)
            sparser += nnz[0] < nnz[1]
        frac = sparser / len(pairs)
        return frac >= 0.9, {"fraction_sparser": frac, "nnz_g0.1_vs_g0": pairs}
    return _timed(8, "gravity produces sparser weights", run)


# --- 9 ---------------------------------------------------------------------------

def reversibility_and_counts(quick: bool = False) -> CriterionResult:
    def run():
        fmt = FixedPointFormat(k=10, f=4)
        rng = np.random.default_rng(9)
        n = 200 if quick else 1000
        failures = 0
        for _ in range(n):
            c = random_circuit(fmt, rng)
            failures += not reversibility_check(c, [random_state(c, rng) for _ in range(8)])
        counts = {}
        for k in range(4, 17):
            f = FixedPointFormat(k=k, f=0)
            model = ToffoliModel()
            _, stats = between_oracle(0, 1, 0, 0, f, model)
            # 1.5*s_comp is fractional for odd s_comp; the half uncompute rounds up
            counts[k] = (stats.toffoli_count, model.between(k))
            if stats.toffoli_count != math.ceil(model.between(k)):
                failures += 1
            even = ToffoliModel(s_comp=2 * k, s_comp_ctrl=2 * k + 2)
            _, stats = between_oracle(0, 1, 0, 0, f, even)
            if stats.toffoli_count != even.between(k):
                failures += 1
        return failures == 0, {"random_circuits": n, "failures": failures, "between_counts": counts}
    return _timed(9, "reversibility and Toffoli counts", run)


CRITERIA = (truncation_exhaustive, lazy_oracle_equivalence, estimator_contracts, theorem_bounds,
            regret_scaling, truncated_gd_inequality, ledger_identity, sparsity_effect,
            reversibility_and_counts)


def run_suite(quick: bool = False, only: tuple[int, ...] = (), workers: int = 1,
              echo: Callable[[str], None] | None = print) -> list[CriterionResult]:
    results = []
    for number, fn in enumerate(CRITERIA, start=1):
        if only and number not in only:
            continue
        kw = {"workers": workers} if fn in (theorem_bounds, regret_scaling) else {}
        res = fn(quick=quick, **kw)
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
