"""Classical stand-ins for amplitude-estimation based subroutines.

Each estimator computes the exact quantity by summation and then perturbs
it so that its error/failure contract holds:

* with probability ``1 - delta`` the error is uniform on ``[-b, b]`` where
  ``b`` is the contract bound;
* with probability ``delta`` it is uniform on ``[-10b, 10b]``.

The query counts that a quantum implementation would need are charged to a
:class:`QueryLedger`. Those counts are a model only: nothing here runs in
``O(sqrt(d))`` time, and no speedup is demonstrated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

SUBROUTINES = ("inner_product", "l1_norm", "state_prep", "max_abs")


@dataclass(frozen=True)
class EstimatorSpec:
    eps_ip: float
    eps_norm: float
    zeta: float = 0.1
    delta: float = 0.1
    rng_seed: int = 0
    noiseless: bool = False

    def __post_init__(self):
        for name in ("eps_ip", "eps_norm", "zeta", "delta"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.zeta > 0.5:
            raise ValueError("zeta must be at most 1/2")

    def per_call_delta(self, rounds: int) -> float:
        """Failure budget of each of the three per-round estimator calls."""
        return self.delta / (3 * rounds)


@dataclass(frozen=True)
class Charge:
    subroutine: str
    t: Optional[int]
    count: float


@dataclass
class QueryLedger:
    """Append-only record of modeled query counts.

    ``norm_model="data"`` charges the cost formulas with the actual vector
    norms. ``norm_model="unit"`` replaces the norm factors by 1, which is
    the accounting used for the closed-form totals of the regret theorems.
    """

    c_ip: float = 1.0
    c_norm: float = 1.0
    c_prep: float = 1.0
    c_max: float = 1.0
    norm_model: str = "data"
    charges: list[Charge] = field(default_factory=list)

    def __post_init__(self):
        if self.norm_model not in ("data", "unit"):
            raise ValueError("norm_model must be 'data' or 'unit'")

    def charge(self, subroutine: str, count: float, t: Optional[int] = None) -> float:
        if subroutine not in SUBROUTINES:
            raise ValueError(f"unknown subroutine {subroutine!r}")
        if count < 0 or not math.isfinite(count):
            raise ValueError(f"bad query count {count}")
        self.charges.append(Charge(subroutine, t, float(count)))
        return count

    def totals(self) -> dict[str, float]:
        return {s: math.fsum(c.count for c in self.charges if c.subroutine == s)
                for s in SUBROUTINES}

    @property
    def total(self) -> float:
        return math.fsum(c.count for c in self.charges)

    def to_json(self, closed_form: Optional[float] = None) -> str:
        doc = {
            "constants": {"c_ip": self.c_ip, "c_norm": self.c_norm,
                          "c_prep": self.c_prep, "c_max": self.c_max},
            "norm_model": self.norm_model,
            "totals": self.totals(),
            "total": self.total,
            "charges": [{"subroutine": c.subroutine, "t": c.t, "count": c.count}
                        for c in self.charges],
        }
        if closed_form is not None:
            doc["closed_form"] = closed_form
            doc["ratio"] = self.total / closed_form if closed_form else None
        return json.dumps(doc, indent=2, sort_keys=True)


def ledger_total(ledger: QueryLedger) -> float:
    return ledger.total


# --- modeled costs -----------------------------------------------------------

def ip_queries(norm_product: float, d: int, eps: float, delta: float, c_ip: float = 1.0) -> float:
    """``c_ip * ||u||_inf ||v||_1 sqrt(d) / eps * ln(1/delta)``."""
    return c_ip * norm_product * math.sqrt(d) / eps * math.log(1.0 / delta)


def l1_additive_queries(norm_inf: float, d: int, eps: float, delta: float,
                        c_norm: float = 1.0) -> float:
    return c_norm * norm_inf * math.sqrt(d) / eps * math.log(1.0 / delta)


def l1_multiplicative_queries(d: int, delta: float, c_norm: float = 1.0) -> float:
    # the multiplicative estimator fails with probability 4*delta; run it at delta/4
    return c_norm * math.sqrt(d) / (delta / 4.0)


def prep_queries(d: int, delta: float, c_prep: float = 1.0) -> float:
    return c_prep * math.sqrt(d) * math.log(1.0 / delta)


def max_queries(d: int, delta: float, c_max: float = 1.0) -> float:
    return c_max * math.sqrt(d) * math.log(1.0 / delta)


def theorem_closed_form(rounds: int, d: int, delta: float, eps_ip: float, eps_norm: float,
                        ledger: Optional[QueryLedger] = None) -> float:
    """Total modeled queries of a theorem-preset run.

    Every round runs inner-product estimation, additive norm estimation and
    state preparation at failure budget ``delta/(3T)``, each weight query
    costing ``T`` example reads, with unit norm factors:

        T^2 sqrt(d) ln(3T/delta) (c_ip/eps_ip + c_norm/eps_norm + c_prep)

    With ``eps_ip, eps_norm = Theta(1/sqrt(T))`` this is
    ``Theta(T^{5/2} sqrt(d) log(T/delta))``.
    """
    led = ledger or QueryLedger()
    return (rounds * rounds * math.sqrt(d) * math.log(3 * rounds / delta)
            * (led.c_ip / eps_ip + led.c_norm / eps_norm + led.c_prep))


# --- vector access -----------------------------------------------------------

@dataclass
class VectorAccess:
    """Entry access to a length-``d`` vector.

    ``bulk`` (optional) returns all entries at once; estimators use it when
    present instead of ``d`` calls to ``reader``.
    """

    length: int
    reader: Callable[[int], float]
    bulk: Optional[Callable[[], np.ndarray]] = None
    query_cost: float = 1.0     # example reads per entry query, charged multiplicatively

    def values(self) -> np.ndarray:
        if self.bulk is not None:
            v = np.asarray(self.bulk(), dtype=float)
            if v.shape != (self.length,):
                raise ValueError("bulk reader returned wrong shape")
            return v
        return np.array([self.reader(j) for j in range(self.length)], dtype=float)

    @classmethod
    def of(cls, u: np.ndarray, query_cost: float = 1.0) -> "VectorAccess":
        u = np.asarray(u, dtype=float).ravel()
        return cls(u.size, lambda j: float(u[j]), lambda: u, query_cost)


VectorLike = Union[VectorAccess, np.ndarray, list]


def _access(u: VectorLike) -> VectorAccess:
    return u if isinstance(u, VectorAccess) else VectorAccess.of(np.asarray(u, dtype=float))


def _check_unit(name: str, v: float) -> None:
    if not 0 < v < 1:
        raise ValueError(f"{name} must lie in (0, 1), got {v}")


def _perturb(truth: float, bound: float, delta: float, rng: np.random.Generator,
             noiseless: bool) -> tuple[float, bool]:
    # always draw the same number of variates so trajectories stay aligned
    fail_draw, noise_draw = rng.random(), rng.uniform(-1.0, 1.0)
    if noiseless:
        return truth, False
    failed = bool(fail_draw < delta)
    width = 10.0 * bound if failed else bound
    return truth + width * noise_draw, failed


# --- estimators --------------------------------------------------------------

def ae_emulate(a: float, t_param: int, eps: float, rng: np.random.Generator,
               size: Optional[int] = None, bias: Optional[float] = None):
    """Draws of an amplitude estimate ``a_tilde`` with bias <= eps and
    variance <= 91 a / t_param^2 + eps.

    One bias is drawn per call and shared by all ``size`` draws. The noise is
    uniform with variance ``91 a (1 - a) / t_param^2`` so that the estimate
    is exact at ``a = 0`` and stays within ``[1 - eps, 1]`` at ``a = 1``.
    """
    if not 0.0 <= a <= 1.0:
        raise ValueError("a must lie in [0, 1]")
    if t_param < 4:
        raise ValueError("t_param must be >= 4")
    _check_unit("eps", eps)
    n = 1 if size is None else int(size)
    if bias is None:
        bias = rng.uniform(-eps, eps)
    elif abs(bias) > eps:
        raise ValueError("bias must not exceed eps")
    if a == 0.0:
        out = np.zeros(n)
    else:
        half_width = math.sqrt(3.0 * 91.0 * a * (1.0 - a)) / t_param
        out = np.clip(a + bias + rng.uniform(-half_width, half_width, size=n), 0.0, 1.0)
    return float(out[0]) if size is None else out


def max_abs(u: VectorLike, delta: float, ledger: Optional[QueryLedger] = None,
            t: Optional[int] = None) -> float:
    acc = _access(u)
    if acc.length == 0:
        raise ValueError("empty vector")
    _check_unit("delta", delta)
    v = acc.values()
    if ledger is not None:
        ledger.charge("max_abs", max_queries(acc.length, delta, ledger.c_max) * acc.query_cost, t)
    return float(np.abs(v).max())


def est_l1_norm(u: VectorLike, delta: float, rng: np.random.Generator,
                ledger: Optional[QueryLedger] = None, *,
                eps_add: Optional[float] = None, eps_mult: Optional[float] = None,
                t: Optional[int] = None, noiseless: bool = False,
                events: Optional[list] = None) -> float:
    """Estimate ``||u||_1`` to additive ``eps_add`` or multiplicative ``eps_mult``.

    Exactly one of ``eps_add`` / ``eps_mult`` must be given. An all-zero
    vector returns 0 without noise.
    """
    if (eps_add is None) == (eps_mult is None):
        raise ValueError("give exactly one of eps_add, eps_mult")
    acc = _access(u)
    if acc.length == 0:
        raise ValueError("empty vector")
    _check_unit("delta", delta)
    _check_unit("eps", eps_add if eps_add is not None else eps_mult)
    v = np.abs(acc.values())
    truth = float(v.sum())
    zmax = float(v.max())
    if ledger is not None:
        if eps_add is not None:
            norm_inf = 1.0 if ledger.norm_model == "unit" else zmax
            count = l1_additive_queries(norm_inf, acc.length, eps_add, delta, ledger.c_norm)
        else:
            count = l1_multiplicative_queries(acc.length, delta, ledger.c_norm)
        ledger.charge("l1_norm", count * acc.query_cost, t)
    if zmax == 0.0:
        rng.random(), rng.uniform(-1.0, 1.0)
        if events is not None:
            events.append(("l1_norm", False))
        return 0.0
    bound = eps_add if eps_add is not None else eps_mult * truth
    est, failed = _perturb(truth, bound, delta, rng, noiseless)
    if events is not None:
        events.append(("l1_norm", failed))
    return max(est, 0.0)


def est_inner_product(u: VectorLike, v: VectorLike, eps: float, delta: float,
                      rng: np.random.Generator, ledger: Optional[QueryLedger] = None, *,
                      t: Optional[int] = None, noiseless: bool = False,
                      events: Optional[list] = None) -> float:
    """Estimate ``u.v`` to additive ``eps`` with probability ``1 - delta``.

    The product is split into ``z+`` (same-sign terms) and ``z-``
    (opposite-sign terms), so ``u.v = ||z+||_1 - ||z-||_1``. Each part is
    normalised by its max-abs entry and its norm estimated multiplicatively
    with accuracy ``eps / (2 ||u||_inf ||v||_1)`` at failure budget
    ``delta/2``. A part whose max entry is 0 contributes exactly 0.
    """
    ua, va = _access(u), _access(v)
    if ua.length != va.length:
        raise ValueError(f"dimension mismatch: {ua.length} vs {va.length}")
    _check_unit("eps", eps)
    _check_unit("delta", delta)
    uu, vv = ua.values(), va.values()
    d = ua.length
    u_inf, v_one = float(np.abs(uu).max(initial=0.0)), float(np.abs(vv).sum())
    if ledger is not None:
        prod = 1.0 if ledger.norm_model == "unit" else u_inf * v_one
        ledger.charge("inner_product",
                      ip_queries(prod, d, eps, delta, ledger.c_ip) * max(ua.query_cost, va.query_cost), t)

    up, um = np.maximum(uu, 0.0), np.maximum(-uu, 0.0)
    vp, vm = np.maximum(vv, 0.0), np.maximum(-vv, 0.0)
    z_plus = up * vp + um * vm
    z_minus = up * vm + um * vp
    part_eps = eps / (u_inf * v_one) if u_inf * v_one > 0 else eps
    failed_any = False
    total = 0.0
    for sign, z in ((1.0, z_plus), (-1.0, z_minus)):
        zmax = float(z.max())
        # keep rng consumption independent of the data
        if zmax == 0.0:
            rng.random(), rng.uniform(-1.0, 1.0)
            continue
        norm = float((z / zmax).sum())
        bound = 0.5 * min(part_eps, 1.0) * norm
        est, failed = _perturb(norm, bound, delta / 2.0, rng, noiseless)
        failed_any |= failed
        total += sign * zmax * est
    if events is not None:
        events.append(("inner_product", failed_any))
    return total


def sample_index(u: VectorLike, zeta: float, delta: float, rng: np.random.Generator,
                 ledger: Optional[QueryLedger] = None, *, t: Optional[int] = None,
                 events: Optional[list] = None) -> int:
    """Draw ``j`` from a distribution within l1 distance ``2*zeta`` of ``|u|/||u||_1``.

    The emulated distribution mixes the exact one with the uniform
    distribution at weight ``zeta``. With probability ``delta`` preparation
    fails and a uniform index is returned.
    """
    acc = _access(u)
    if not 0 < zeta <= 0.5:
        raise ValueError("zeta must lie in (0, 1/2]")
    _check_unit("delta", delta)
    a = np.abs(acc.values())
    total = a.sum()
    if total == 0.0:
        raise ValueError("cannot prepare a state from the zero vector")
    if ledger is not None:
        ledger.charge("state_prep", prep_queries(acc.length, delta, ledger.c_prep) * acc.query_cost, t)
    d = acc.length
    failed = bool(rng.random() < delta)
    if failed:
        p = np.full(d, 1.0 / d)
    else:
        p = (1.0 - zeta) * (a / total) + zeta / d
    if events is not None:
        events.append(("state_prep", failed))
    return int(rng.choice(d, p=p))


def prep_distribution(u: np.ndarray, zeta: float) -> np.ndarray:
    """The success-branch distribution used by :func:`sample_index`."""
    a = np.abs(np.asarray(u, dtype=float))
    return (1.0 - zeta) * (a / a.sum()) + zeta / a.size
