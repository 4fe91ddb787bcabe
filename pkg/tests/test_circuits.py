import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from truncsparse.circuits import (CNOT, AddInto, Circuit, Compare, Copy, FixedPointFormat, GateStats,
                                  Minmax, ModAdd, Swap, Toffoli, ToffoliModel, X, between_circuit,
                                  between_oracle, build_truncation_circuit, compare_oracle,
                                  controlled_compare_oracle, exhaustive_truncation, is_permutation,
                                  minmax_circuit, minmax_oracle, random_circuit, random_state,
                                  reversibility_check, truncate_fixed, truncation_circuit,
                                  truncation_input)
from truncsparse.truncation import truncate_entry

F4 = FixedPointFormat(k=4, f=0)


def test_format_round_trip():
    fmt = FixedPointFormat(k=8, f=3)
    for raw in fmt.all_raw():
        assert fmt.encode(fmt.decode(raw)) == raw
    with pytest.raises(ValueError):
        fmt.encode(0.1)
    with pytest.raises(OverflowError):
        fmt.encode(100.0)


def test_compare_examples():
    assert compare_oracle("0011", "0100", 0, F4)[0][2] == 1
    assert compare_oracle("0101", "0101", 0, F4)[0][2] == 0
    assert controlled_compare_oracle(0, "0011", "0100", 0, F4)[0] == 0
    assert controlled_compare_oracle(1, "0011", "0100", 0, F4)[0] == 1


def test_compare_exhaustive_k6():
    fmt = FixedPointFormat(k=6, f=0)
    for x, a in itertools.product(fmt.all_raw(), repeat=2):
        (xo, ao, z), _ = compare_oracle(x, a, 0, fmt)
        assert (xo, ao) == (x, a)
        assert z == int(fmt.to_signed(x) < fmt.to_signed(a))


def test_between_examples():
    fmt = FixedPointFormat(k=5, f=0)
    assert between_oracle(0, 4, 4, 0, fmt)[0] == 1
    assert between_oracle(1, 3, 0, 0, fmt)[0] == 0
    with pytest.raises(ValueError):
        between_oracle(3, 1, 0, 0, fmt)


def test_between_exhaustive_k5():
    fmt = FixedPointFormat(k=5, f=0)
    c = between_circuit(fmt)
    for a, b, x in itertools.product(fmt.all_raw(), repeat=3):
        sa, sb, sx = (fmt.to_signed(v) for v in (a, b, x))
        if sa > sb:
            continue
        for z in (0, 1):
            out = c.apply({"a": a, "b": b, "x": x, "z": z, "anc": 0})
            assert out["z"] == z ^ int(sa <= sx <= sb)
            assert out["anc"] == 0


@pytest.mark.parametrize("k", range(4, 17))
def test_between_count(k):
    fmt = FixedPointFormat(k=k, f=0)
    model = ToffoliModel()
    _, stats = between_oracle(0, 1, 0, 0, fmt, model)
    s, s_ctrl = model.comp(k), model.comp_ctrl(k)
    assert (s, s_ctrl) == (2 * k - 1, 2 * k + 1)
    # 1.5*s is a half-integer for odd s; the half-cost uncompute rounds up
    assert stats.toffoli_count == s + s_ctrl + -(-s // 2) == 5 * k
    even = ToffoliModel(s_comp=2 * k, s_comp_ctrl=3 * k)
    assert between_oracle(0, 1, 0, 0, fmt, even)[1].toffoli_count == even.between(k)


def test_minmax_examples():
    fmt = FixedPointFormat(k=6, f=0)
    assert minmax_oracle(1, fmt.to_raw(-3), fmt)[0] == 0
    assert fmt.to_signed(minmax_oracle(0, fmt.to_raw(-3), fmt)[0]) == -3
    with pytest.raises(ValueError):
        minmax_oracle(1, 0, fmt, out=1)


def test_minmax_exhaustive_k8():
    fmt = FixedPointFormat(k=8, f=0)
    for c, x in itertools.product((0, 1), fmt.all_raw()):
        v = fmt.to_signed(x)
        assert fmt.to_signed(minmax_oracle(c, x, fmt)[0]) == (max(v, 0) if c else min(v, 0))


def test_truncation_example():
    fmt = FixedPointFormat(k=12, f=6)
    r = truncate_fixed(0.5, 0.25, 1.0, fmt)
    assert r.output == 0.25 and r.ancilla_clean and r.params_preserved
    over = 1.0 + fmt.ulp
    assert truncate_fixed(over, 0.25, 1.0, fmt).output == over
    assert truncate_fixed(-over, 0.25, 1.0, fmt).output == -over


@pytest.mark.parametrize("alpha,theta", [(0.25, 1.0), (0.0, 2.0), (1.5, 0.5)])
def test_truncation_exhaustive_k12(alpha, theta):
    fmt = FixedPointFormat(k=12, f=6)
    for raw, r in zip(fmt.all_raw(), exhaustive_truncation(fmt, alpha, theta)):
        assert r.output == truncate_entry(fmt.decode(raw), alpha, theta)
        assert r.ancilla_clean and r.params_preserved and not r.overflow


def test_truncation_rejects_bad_parameters():
    fmt = FixedPointFormat(k=8, f=2)
    with pytest.raises(ValueError):
        truncation_input(fmt, 0, fmt.encode(-0.25), fmt.encode(1.0))
    with pytest.raises(ValueError):
        truncation_input(fmt, 0, fmt.encode(0.25), 0)


def test_truncation_then_inverse_is_identity(rng):
    fmt = FixedPointFormat(k=10, f=4)
    c = build_truncation_circuit(fmt)
    inputs = [truncation_input(fmt, int(rng.integers(1 << 10)), fmt.encode(0.5), fmt.encode(2.0))
              for _ in range(100)]
    assert reversibility_check(c, inputs)


def test_empty_circuit_and_double_compare():
    fmt = FixedPointFormat(k=4, f=0)
    empty = Circuit(fmt)
    empty.add_register("r")
    assert empty.apply({"r": 5}) == {"r": 5}
    c = Circuit(fmt)
    for r in ("x", "a"):
        c.add_register(r)
    c.add_register("z", flag=True)
    c.append(Compare("x", "a", "z"), Compare("x", "a", "z"))
    for x, a, z in itertools.product(range(16), range(16), (0, 1)):
        assert c.apply({"x": x, "a": a, "z": z}) == {"x": x, "a": a, "z": z}


def _single(op, words=("p", "q", "r"), flags=("c", "d", "e"), k=3):
    c = Circuit(FixedPointFormat(k=k, f=0))
    for w in words:
        c.add_register(w)
    for f in flags:
        c.add_register(f, flag=True)
    return c.append(op)


@pytest.mark.parametrize("op", [
    X("c"), CNOT("c", "d"), Toffoli("c", "d", "e"), Swap("p", "q"), Copy("p", "q"),
    Copy("p", "q", ctrl="c"), Compare("p", "q", "c"), Compare("p", "q", "c", ctrl="d"),
    Minmax("c", "p", "q"), Minmax("c", "p", "q", ctrl="d"), AddInto("p", "q", "r"),
    AddInto("p", "q", "r", sign=-1, ctrl="c"), ModAdd("p", "q"), ModAdd("p", "q", sign=-1),
])
def test_primitives_are_permutations(op):
    assert is_permutation(_single(op))


def test_oracles_are_permutations():
    fmt = FixedPointFormat(k=4, f=0)
    assert is_permutation(between_circuit(fmt))
    assert is_permutation(minmax_circuit(FixedPointFormat(k=6, f=0)))


def test_register_checks():
    c = Circuit(FixedPointFormat(k=4, f=0))
    c.add_register("p")
    with pytest.raises(ValueError):
        c.add_register("p")
    with pytest.raises((ValueError, KeyError)):
        c.append(X("missing"))


def test_stats_are_additive():
    fmt = FixedPointFormat(k=8, f=2)
    c = build_truncation_circuit(fmt)
    total = GateStats()
    for op in c.ops:
        total = total + op.stats(fmt, c.model)
    assert c.stats() == total
    assert c.inverse().stats() == c.stats()


@given(st.integers(0, 2**32 - 1))
def test_random_circuits_reverse(seed):
    rng = np.random.default_rng(seed)
    fmt = FixedPointFormat(k=10, f=4)
    c = random_circuit(fmt, rng)
    assert reversibility_check(c, [random_state(c, rng) for _ in range(4)])
