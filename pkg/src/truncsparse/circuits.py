"""Bit-exact simulation of reversible fixed-point oracles.

Registers hold raw ``k``-bit two's complement patterns (flags are 1 bit).
Every operation is a bijection on the register file and knows its own
inverse, so a circuit followed by :meth:`Circuit.inverse` is the identity.
Toffoli counts are modeled tallies, not a gate-level synthesis: a
comparator costs ``s_comp`` (default ``2k-1``, the Toffoli count of a
``k``-bit adder), a controlled comparator ``s_comp_ctrl`` (default ``2k+1``),
and uncomputing a comparator half of ``s_comp`` rounded up, which puts the
Between oracle at ``1.5 s_comp + s_comp_ctrl``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np


@dataclass(frozen=True)
class FixedPointFormat:
    k: int
    f: int

    def __post_init__(self):
        if not 2 <= self.k <= 24:
            raise ValueError("total bits must lie in 2..24")
        if not 0 <= self.f < self.k:
            raise ValueError("fractional bits must lie in 0..k-1")

    @property
    def mask(self) -> int:
        return (1 << self.k) - 1

    @property
    def min_int(self) -> int:
        return -(1 << (self.k - 1))

    @property
    def max_int(self) -> int:
        return (1 << (self.k - 1)) - 1

    @property
    def ulp(self) -> float:
        return 2.0 ** -self.f

    def to_signed(self, raw: int) -> int:
        raw &= self.mask
        return raw - (1 << self.k) if raw >> (self.k - 1) else raw

    def to_raw(self, n: int) -> int:
        if not self.min_int <= n <= self.max_int:
            raise OverflowError(f"{n} does not fit in {self.k} bits")
        return n & self.mask

    def encode(self, value: float) -> int:
        """Raw bits of ``value``; it must lie exactly on the grid."""
        scaled = value * (1 << self.f)
        n = int(round(scaled))
        if n != scaled:
            raise ValueError(f"{value} is not representable with {self.f} fractional bits")
        return self.to_raw(n)

    def decode(self, raw: int) -> float:
        return self.to_signed(raw) / (1 << self.f)

    def saturate(self, n: int) -> tuple[int, bool]:
        if n > self.max_int:
            return self.max_int, True
        if n < self.min_int:
            return self.min_int, True
        return n, False

    def all_raw(self) -> range:
        return range(1 << self.k)


def from_bits(bits: str) -> int:
    return int(bits.replace("_", ""), 2)


@dataclass
class GateStats:
    toffoli_count: int = 0
    toffoli_depth: int = 0

    def __add__(self, other: "GateStats") -> "GateStats":
        return GateStats(self.toffoli_count + other.toffoli_count,
                         self.toffoli_depth + other.toffoli_depth)

    def as_dict(self) -> dict:
        return {"toffoli_count": self.toffoli_count, "toffoli_depth": self.toffoli_depth}


@dataclass(frozen=True)
class ToffoliModel:
    s_comp: Optional[int] = None
    s_comp_ctrl: Optional[int] = None

    def comp(self, k: int) -> int:
        return self.s_comp if self.s_comp is not None else 2 * k - 1

    def comp_ctrl(self, k: int) -> int:
        return self.s_comp_ctrl if self.s_comp_ctrl is not None else 2 * k + 1

    def between(self, k: int) -> float:
        return 1.5 * self.comp(k) + self.comp_ctrl(k)


class ExecLog:
    """Side channel filled during simulation (not part of the bit state)."""

    def __init__(self):
        self.overflow = False


# --- primitive operations ------------------------------------------------------
# each op: registers() -> names it touches, apply(state, fmt, log), inverse(), stats(fmt, model)

@dataclass(frozen=True)
class Op:
    def registers(self) -> tuple[str, ...]:
        raise NotImplementedError

    def inverse(self) -> "Op":
        return self          # XOR-style ops are involutions

    def stats(self, fmt: FixedPointFormat, model: ToffoliModel) -> GateStats:
        return GateStats()

    def _on(self, state: dict, ctrl: Optional[str], ctrl_on: int = 1) -> bool:
        return ctrl is None or state[ctrl] == ctrl_on


@dataclass(frozen=True)
class X(Op):
    reg: str

    def registers(self):
        return (self.reg,)

    def apply(self, state, fmt, log):
        state[self.reg] ^= 1


@dataclass(frozen=True)
class CNOT(Op):
    ctrl: str
    target: str

    def registers(self):
        return (self.ctrl, self.target)

    def apply(self, state, fmt, log):
        state[self.target] ^= state[self.ctrl]


@dataclass(frozen=True)
class Toffoli(Op):
    c1: str
    c2: str
    target: str

    def registers(self):
        return (self.c1, self.c2, self.target)

    def apply(self, state, fmt, log):
        state[self.target] ^= state[self.c1] & state[self.c2]

    def stats(self, fmt, model):
        return GateStats(1, 1)


@dataclass(frozen=True)
class Swap(Op):
    a: str
    b: str

    def registers(self):
        return (self.a, self.b)

    def apply(self, state, fmt, log):
        state[self.a], state[self.b] = state[self.b], state[self.a]


@dataclass(frozen=True)
class Copy(Op):
    """``dst ^= src`` (optionally controlled on a flag)."""

    src: str
    dst: str
    ctrl: Optional[str] = None

    def registers(self):
        return (self.src, self.dst) + ((self.ctrl,) if self.ctrl else ())

    def apply(self, state, fmt, log):
        if self._on(state, self.ctrl):
            state[self.dst] ^= state[self.src]

    def stats(self, fmt, model):
        return GateStats(fmt.k, 1) if self.ctrl else GateStats()


@dataclass(frozen=True)
class Compare(Op):
    """``z ^= [x < a]`` on signed values, optionally controlled (``z ^= c*[x < a]``)."""

    x: str
    a: str
    z: str
    ctrl: Optional[str] = None
    uncompute: bool = False     # bookkeeping only: charged at half cost

    def registers(self):
        return (self.x, self.a, self.z) + ((self.ctrl,) if self.ctrl else ())

    def apply(self, state, fmt, log):
        if self._on(state, self.ctrl) and fmt.to_signed(state[self.x]) < fmt.to_signed(state[self.a]):
            state[self.z] ^= 1

    def stats(self, fmt, model):
        if self.ctrl:
            return GateStats(model.comp_ctrl(fmt.k), fmt.k + 1)
        if self.uncompute:
            return GateStats(math.ceil(model.comp(fmt.k) / 2), math.ceil(fmt.k / 2))
        return GateStats(model.comp(fmt.k), fmt.k)


@dataclass(frozen=True)
class Minmax(Op):
    """``out ^= max(x, 0)`` if ``c == 1`` else ``out ^= min(x, 0)``."""

    c: str
    x: str
    out: str
    ctrl: Optional[str] = None

    def registers(self):
        return (self.c, self.x, self.out) + ((self.ctrl,) if self.ctrl else ())

    def apply(self, state, fmt, log):
        if not self._on(state, self.ctrl):
            return
        v = fmt.to_signed(state[self.x])
        r = max(v, 0) if state[self.c] else min(v, 0)
        state[self.out] ^= fmt.to_raw(r)

    def stats(self, fmt, model):
        return GateStats(2 * fmt.k if self.ctrl else fmt.k, 2 if self.ctrl else 1)


@dataclass(frozen=True)
class AddInto(Op):
    """``out ^= sat(x + sign*a)``, saturating at the format limits."""

    x: str
    a: str
    out: str
    sign: int = 1
    ctrl: Optional[str] = None

    def registers(self):
        return (self.x, self.a, self.out) + ((self.ctrl,) if self.ctrl else ())

    def apply(self, state, fmt, log):
        if not self._on(state, self.ctrl):
            return
        n, over = fmt.saturate(fmt.to_signed(state[self.x]) + self.sign * fmt.to_signed(state[self.a]))
        if over and log is not None:
            log.overflow = True
        state[self.out] ^= fmt.to_raw(n)

    def stats(self, fmt, model):
        extra = fmt.k if self.ctrl else 0
        return GateStats(2 * fmt.k - 1 + extra, fmt.k)


@dataclass(frozen=True)
class ModAdd(Op):
    """In-place ``dst += sign*src (mod 2^k)``; inverse flips the sign."""

    src: str
    dst: str
    sign: int = 1

    def registers(self):
        return (self.src, self.dst)

    def apply(self, state, fmt, log):
        state[self.dst] = (state[self.dst] + self.sign * state[self.src]) & fmt.mask

    def inverse(self):
        return ModAdd(self.src, self.dst, -self.sign)

    def stats(self, fmt, model):
        return GateStats(2 * fmt.k - 1, fmt.k)


# --- circuits ------------------------------------------------------------------

@dataclass
class Circuit:
    fmt: FixedPointFormat
    widths: dict[str, int] = field(default_factory=dict)
    ancillas: set[str] = field(default_factory=set)
    ops: list[Op] = field(default_factory=list)
    model: ToffoliModel = field(default_factory=ToffoliModel)

    def add_register(self, name: str, flag: bool = False, ancilla: bool = False) -> str:
        if name in self.widths:
            raise ValueError(f"duplicate register {name}")
        self.widths[name] = 1 if flag else self.fmt.k
        if ancilla:
            self.ancillas.add(name)
        return name

    def append(self, *ops: Op | Iterable[Op]) -> "Circuit":
        for op in ops:
            if isinstance(op, Op):
                self._check(op)
                self.ops.append(op)
            else:
                self.append(*op)
        return self

    def _check(self, op: Op) -> None:
        regs = op.registers()
        for r in regs:
            if r not in self.widths:
                raise KeyError(f"unknown register {r}")
        if len(set(regs)) != len(regs):
            raise ValueError(f"{op} uses a register twice")

    def zero_state(self) -> dict[str, int]:
        return {r: 0 for r in self.widths}

    def apply(self, state: dict[str, int], log: Optional[ExecLog] = None) -> dict[str, int]:
        out = dict(state)
        for r, w in self.widths.items():
            if not 0 <= out[r] < (1 << w):
                raise ValueError(f"register {r} holds {out[r]}, wider than {w} bits")
        for op in self.ops:
            op.apply(out, self.fmt, log)
        return out

    def inverse(self) -> "Circuit":
        return Circuit(self.fmt, dict(self.widths), set(self.ancillas),
                       [op.inverse() for op in reversed(self.ops)], self.model)

    def stats(self) -> GateStats:
        total = GateStats()
        for op in self.ops:
            total = total + op.stats(self.fmt, self.model)
        return total

    def ancillas_clean(self, state: dict[str, int]) -> bool:
        return all(state[a] == 0 for a in self.ancillas)


def between_ops(a: str, b: str, x: str, z: str, anc: str) -> list[Op]:
    """``z ^= [a <= x <= b]`` using one clean flag ``anc`` which is restored."""
    return [
        Compare(x, a, anc),                 # anc = [x < a]
        X(anc),                             # anc = [x >= a]
        CNOT(anc, z),
        Compare(b, x, z, ctrl=anc),         # removes the part with b < x
        X(anc),
        Compare(x, a, anc, uncompute=True),
    ]


def reversibility_check(circuit: Circuit, inputs: Iterable[dict[str, int]]) -> bool:
    inv = circuit.inverse()
    for state in inputs:
        if inv.apply(circuit.apply(state)) != dict(state):
            return False
    return True


def is_permutation(circuit: Circuit, max_bits: int = 20) -> bool:
    """Exhaustively check that the circuit permutes the full register state."""
    names = list(circuit.widths)
    total = sum(circuit.widths.values())
    if total > max_bits:
        raise ValueError(f"{total} state bits is too many to enumerate")
    seen = set()
    for combo in itertools.product(*(range(1 << circuit.widths[n]) for n in names)):
        out = circuit.apply(dict(zip(names, combo)))
        seen.add(tuple(out[n] for n in names))
    return len(seen) == 1 << total


# --- oracle entry points -------------------------------------------------------

def _raw(fmt: FixedPointFormat, v: int | str) -> int:
    r = from_bits(v) if isinstance(v, str) else int(v)
    if not 0 <= r <= fmt.mask:
        raise ValueError(f"{v!r} is not a {fmt.k}-bit pattern")
    return r


def compare_oracle(x: int | str, a: int | str, z: int, fmt: FixedPointFormat,
                   model: ToffoliModel = ToffoliModel()) -> tuple[tuple[int, int, int], GateStats]:
    c = Circuit(fmt, model=model)
    for r in ("x", "a"):
        c.add_register(r)
    c.add_register("z", flag=True)
    c.append(Compare("x", "a", "z"))
    out = c.apply({"x": _raw(fmt, x), "a": _raw(fmt, a), "z": int(z) & 1})
    return (out["x"], out["a"], out["z"]), c.stats()


def controlled_compare_oracle(c_bit: int, x: int | str, a: int | str, z: int,
                              fmt: FixedPointFormat, model: ToffoliModel = ToffoliModel()):
    c = Circuit(fmt, model=model)
    c.add_register("c", flag=True)
    c.add_register("x")
    c.add_register("a")
    c.add_register("z", flag=True)
    c.append(Compare("x", "a", "z", ctrl="c"))
    out = c.apply({"c": int(c_bit) & 1, "x": _raw(fmt, x), "a": _raw(fmt, a), "z": int(z) & 1})
    return out["z"], c.stats()


def between_circuit(fmt: FixedPointFormat, model: ToffoliModel = ToffoliModel()) -> Circuit:
    c = Circuit(fmt, model=model)
    for r in ("a", "b", "x"):
        c.add_register(r)
    c.add_register("z", flag=True)
    c.add_register("anc", flag=True, ancilla=True)
    c.append(between_ops("a", "b", "x", "z", "anc"))
    return c


def between_oracle(a: int | str, b: int | str, x: int | str, z: int, fmt: FixedPointFormat,
                   model: ToffoliModel = ToffoliModel()) -> tuple[int, GateStats]:
    ra, rb = _raw(fmt, a), _raw(fmt, b)
    if fmt.to_signed(ra) > fmt.to_signed(rb):
        raise ValueError("between oracle needs a <= b")
    c = between_circuit(fmt, model)
    out = c.apply({"a": ra, "b": rb, "x": _raw(fmt, x), "z": int(z) & 1, "anc": 0})
    assert out["anc"] == 0
    return out["z"], c.stats()


def minmax_circuit(fmt: FixedPointFormat, model: ToffoliModel = ToffoliModel()) -> Circuit:
    c = Circuit(fmt, model=model)
    c.add_register("c", flag=True)
    c.add_register("x")
    c.add_register("out")
    c.append(Minmax("c", "x", "out"))
    return c


def minmax_oracle(c_bit: int, x: int | str, fmt: FixedPointFormat, out: int = 0,
                  model: ToffoliModel = ToffoliModel()) -> tuple[int, GateStats]:
    if out != 0:
        raise ValueError("minmax output register must start at zero")
    c = minmax_circuit(fmt, model)
    res = c.apply({"c": int(c_bit) & 1, "x": _raw(fmt, x), "out": 0})
    return res["out"], c.stats()


# --- truncation ------------------------------------------------------------------

PARAM_REGS = ("alpha", "neg_theta", "zero", "theta")


def build_truncation_circuit(fmt: FixedPointFormat, model: ToffoliModel = ToffoliModel()) -> Circuit:
    """``|x>|0> -> |x>|f(x)>`` with all work registers returned to zero.

    ``f`` shrinks ``x`` towards zero by ``alpha`` when ``0 < x <= theta``
    or ``-theta <= x < 0`` (clamping at zero) and passes it through
    otherwise. Parameter registers hold ``alpha, -theta, 0, theta``.
    """
    c = Circuit(fmt, model=model)
    for r in PARAM_REGS + ("x", "out"):
        c.add_register(r)
    c.add_register("tmp", ancilla=True)
    for flag in ("b_pos", "b_neg", "c_neg", "inr", "anc"):
        c.add_register(flag, flag=True, ancilla=True)

    compute = [
        *between_ops("zero", "theta", "x", "b_pos", "anc"),       # b_pos = [0 <= x <= theta]
        *between_ops("neg_theta", "zero", "x", "b_neg", "anc"),   # b_neg = [-theta <= x <= 0]
        X("b_pos"), Toffoli("b_pos", "b_neg", "c_neg"), X("b_pos"),  # c_neg = b_neg and not b_pos
        CNOT("b_pos", "inr"), CNOT("c_neg", "inr"),              # inr = either branch
        AddInto("x", "alpha", "tmp", sign=-1, ctrl="b_pos"),
        AddInto("x", "alpha", "tmp", sign=+1, ctrl="c_neg"),
    ]
    write = [
        Minmax("b_pos", "tmp", "out", ctrl="inr"),
        X("inr"), Copy("x", "out", ctrl="inr"), X("inr"),
    ]
    c.append(compute, write, [op.inverse() for op in reversed(compute)])
    return c


@dataclass
class TruncationResult:
    output_raw: int
    output: float
    stats: GateStats
    ancilla_clean: bool
    params_preserved: bool
    overflow: bool


def truncation_input(fmt: FixedPointFormat, x_raw: int, alpha_raw: int, theta_raw: int) -> dict[str, int]:
    a, th = fmt.to_signed(alpha_raw), fmt.to_signed(theta_raw)
    if a < 0:
        raise ValueError("alpha must be nonnegative")
    if th <= 0:
        raise ValueError("theta must be positive")
    if -th < fmt.min_int:
        raise ValueError("-theta is not representable")
    return {"alpha": alpha_raw, "neg_theta": fmt.to_raw(-th), "zero": 0, "theta": theta_raw,
            "x": x_raw, "out": 0, "tmp": 0, "b_pos": 0, "b_neg": 0, "c_neg": 0, "inr": 0, "anc": 0}


def truncation_circuit(x: int | str, alpha: int | str, theta: int | str, fmt: FixedPointFormat,
                       circuit: Optional[Circuit] = None) -> TruncationResult:
    """Run the truncation circuit on raw bit patterns."""
    circuit = circuit or build_truncation_circuit(fmt)
    state = truncation_input(fmt, _raw(fmt, x), _raw(fmt, alpha), _raw(fmt, theta))
    log = ExecLog()
    out = circuit.apply(state, log)
    preserved = all(out[r] == state[r] for r in PARAM_REGS + ("x",))
    return TruncationResult(out["out"], fmt.decode(out["out"]), circuit.stats(),
                            circuit.ancillas_clean(out), preserved, log.overflow)


def truncate_fixed(x: float, alpha: float, theta: float, fmt: FixedPointFormat,
                   circuit: Optional[Circuit] = None) -> TruncationResult:
    """:func:`truncation_circuit` on real values that lie on the format grid."""
    return truncation_circuit(fmt.encode(x), fmt.encode(alpha), fmt.encode(theta), fmt, circuit)


def exhaustive_truncation(fmt: FixedPointFormat, alpha: float, theta: float) -> list[TruncationResult]:
    circuit = build_truncation_circuit(fmt)
    a, th = fmt.encode(alpha), fmt.encode(theta)
    return [truncation_circuit(x, a, th, fmt, circuit) for x in fmt.all_raw()]


# --- random circuits for reversibility sweeps --------------------------------------

def random_circuit(fmt: FixedPointFormat, rng: np.random.Generator, n_ops: int = 12,
                   n_words: int = 4, n_flags: int = 3) -> Circuit:
    c = Circuit(fmt)
    words = [c.add_register(f"r{i}") for i in range(n_words)]
    flags = [c.add_register(f"f{i}", flag=True) for i in range(n_flags)]

    def pick(pool, n):
        return [pool[i] for i in rng.choice(len(pool), size=n, replace=False)]

    makers = [
        lambda: X(*pick(flags, 1)),
        lambda: CNOT(*pick(flags, 2)),
        lambda: Toffoli(*pick(flags, 3)),
        lambda: Swap(*pick(words, 2)),
        lambda: Copy(*pick(words, 2)),
        lambda: Copy(*pick(words, 2), ctrl=pick(flags, 1)[0]),
        lambda: Compare(*pick(words, 2), *pick(flags, 1)),
        lambda: Compare(*pick(words, 2), *pick(flags, 2)),
        lambda: Minmax(pick(flags, 1)[0], *pick(words, 2)),
        lambda: AddInto(*pick(words, 3), sign=int(rng.choice([-1, 1]))),
        lambda: ModAdd(*pick(words, 2), sign=int(rng.choice([-1, 1]))),
        lambda: between_ops(*pick(words, 3), *pick(flags, 2)),
    ]
    for _ in range(n_ops):
        c.append(makers[int(rng.integers(len(makers)))]())
    return c


def random_state(circuit: Circuit, rng: np.random.Generator) -> dict[str, int]:
    return {r: int(rng.integers(1 << w)) for r, w in circuit.widths.items()}
