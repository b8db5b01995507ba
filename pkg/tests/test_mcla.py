import itertools

import numpy as np
import pytest

from cicdecim.errors import ConfigError, ContractError
from cicdecim.fixed_point import FixedWord, add_wrap
from cicdecim.mcla import (
    Gate,
    Netlist,
    PgPair,
    bit_pg,
    block_carries,
    check_netlist,
    emit_netlist,
    evaluate_netlist,
    format_netlist,
    group_pg,
    mcla_add,
    mcla_add_array,
    mcla_sub,
    netlist_add,
    parse_netlist,
)
from cicdecim.verify import behavioral_add, verify_adder, verify_block_identity, verify_netlist


def pairs(p, g):
    return [PgPair(pi, gi) for pi, gi in zip(p, g)]


@pytest.mark.parametrize(
    "a,b,expected", [(0, 0, (0, 0)), (1, 1, (0, 1)), (1, 0, (1, 0)), (0, 1, (1, 0))]
)
def test_bit_pg(a, b, expected):
    assert bit_pg(a, b) == expected


def test_bit_pg_never_both():
    for a, b in itertools.product((0, 1), repeat=2):
        pg = bit_pg(a, b)
        assert not (pg.p and pg.g)


def test_group_pg_examples():
    assert group_pg(pairs([1, 1, 1, 1], [0, 0, 0, 0])) == (1, 0)
    assert group_pg(pairs([0, 0, 0, 0], [0, 0, 0, 1])) == (0, 1)
    assert group_pg(pairs([0, 1, 1, 1], [1, 0, 0, 0])) == (0, 1)


def test_block_carries_examples():
    assert block_carries(pairs([0] * 4, [0] * 4), 1) == (0, 0, 0, 0)
    assert block_carries(pairs([1] * 4, [0] * 4), 1) == (1, 1, 1, 1)
    assert block_carries(pairs([0] * 4, [1, 0, 0, 0]), 0) == (1, 0, 0, 0)


def test_block_rejects_wrong_size():
    with pytest.raises(ContractError):
        group_pg(pairs([1, 1, 1], [0, 0, 0]))


def test_block_carries_match_ripple_and_group_form():
    for bits in itertools.product((0, 1), repeat=9):
        a, b, c0 = bits[:4], bits[4:8], bits[8]
        pg = [bit_pg(x, y) for x, y in zip(a, b)]
        carries = block_carries(pg, c0)
        # ripple oracle
        c, ripple = c0, []
        for x, y in zip(a, b):
            c = (x & y) | ((x ^ y) & c)
            ripple.append(c)
        assert list(carries) == ripple
        G = group_pg(pg)
        assert carries[3] == G.G_G | (G.P_G & c0)
        if G.P_G:
            assert all(x.p for x in pg)


def test_block_identity_report():
    rep = verify_block_identity()
    assert rep.cases == 512 and rep.passed


def test_mcla_add_examples():
    assert mcla_add(FixedWord(3, 8), FixedWord(5, 8), 0) == (FixedWord(8, 8), 0)
    assert mcla_add(FixedWord(-1, 8), FixedWord(0, 8), 1) == (FixedWord(0, 8), 1)
    with pytest.raises(ContractError):
        mcla_add(FixedWord(1, 8), FixedWord(1, 9))


def test_mcla_sub():
    for a, b in [(5, 3), (-128, 1), (0, -128), (100, -27)]:
        assert mcla_sub(FixedWord(a, 8), FixedWord(b, 8)) == add_wrap(
            FixedWord(a, 8), FixedWord(-b if b != -128 else -128, 8)
        )


@pytest.mark.parametrize("width", [1, 2, 3, 4, 5, 6, 7, 8, 9, 10])
def test_exhaustive_small_widths(width):
    rep = verify_adder(width, "exhaustive")
    assert rep.cases == 2 ** (2 * width + 1)
    assert rep.passed, rep


@pytest.mark.parametrize("width", range(12, 29))
def test_random_widths_12_to_28(width):
    rep = verify_adder(width, "random", n=10 ** 6, seed=width)
    assert rep.passed, rep


@pytest.mark.parametrize("width", [32, 61, 62, 63, 64])
def test_wide_words(width):
    assert verify_adder(width, "random", n=2000, seed=3).passed


def test_array_kernel_matches_scalar(rng):
    a = rng.integers(-(2 ** 24), 2 ** 24, 200)
    b = rng.integers(-(2 ** 24), 2 ** 24, 200)
    c = rng.integers(0, 2, 200)
    s, co = mcla_add_array(a, b, c, 25)
    for i in range(200):
        ref = mcla_add(FixedWord(int(a[i]), 25), FixedWord(int(b[i]), 25), int(c[i]))
        assert (int(s[i]), int(co[i])) == (ref[0].value, ref[1])


def test_behavioral_oracle_python_path_agrees():
    a = np.array([-1, 5, 2 ** 40])
    b = np.array([1, -7, 2 ** 40])
    c = np.array([0, 1, 1])
    s61, co61 = behavioral_add(a, b, c, 61)
    s62, co62 = behavioral_add(a, b, c, 62)
    assert s61.tolist() == s62.tolist() == [0, -1, 2 ** 41 + 1]
    assert co61.tolist() == co62.tolist() == [1, 0, 0]


# -- netlist ---------------------------------------------------------------


def test_netlist_width4_exhaustive():
    net = emit_netlist(4)
    rep = verify_netlist(net, "exhaustive")
    assert rep.cases == 512 and rep.passed


def test_netlist_width8_structure():
    net = emit_netlist(8)
    assert net.group_blocks() == 2
    assert set(g.kind for g in net.gates) <= {"AND", "OR", "XOR"}
    assert net.inputs[-1] == "c0" and net.outputs[-1] == "cout"
    check_netlist(net)  # topological order, no dangling outputs


@pytest.mark.parametrize("width", [4, 8, 12, 16, 24, 28, 64])
def test_netlist_random_and_lint(width):
    net = emit_netlist(width)
    check_netlist(net)
    assert net.group_blocks() == width // 4
    assert verify_netlist(net, "random", n=3000, seed=width).passed


@pytest.mark.parametrize("width", [3, 6, 10, 68, 0])
def test_netlist_width_errors(width):
    with pytest.raises(ConfigError):
        emit_netlist(width)


def test_netlist_text_roundtrip():
    net = emit_netlist(8)
    text = format_netlist(net)
    assert text.endswith("\n") and "\r" not in text
    assert text.splitlines()[0].startswith("input a[0]")
    assert text.splitlines()[1].startswith("output sum[0]")
    again = parse_netlist(text)
    assert again == net
    assert format_netlist(again) == text


def test_check_netlist_catches_problems():
    good = emit_netlist(4)
    reordered = Netlist(good.inputs, good.outputs, good.gates[::-1])
    with pytest.raises(ContractError):
        check_netlist(reordered)
    extra = Netlist(good.inputs, good.outputs, good.gates + (Gate("AND", "spare", ("a[0]", "b[0]")),))
    with pytest.raises(ContractError):
        check_netlist(extra)
    with pytest.raises(ContractError):
        parse_netlist("NAND x a b\n")


def test_evaluate_scalar_inputs():
    net = emit_netlist(4)
    ins = {f"a[{i}]": (0b0111 >> i) & 1 for i in range(4)}
    ins.update({f"b[{i}]": (0b0001 >> i) & 1 for i in range(4)})
    ins["c0"] = 0
    out = evaluate_netlist(net, ins)
    s = sum(out[f"sum[{i}]"] << i for i in range(4))
    assert s == 0b1000 and out["cout"] == 0
    s, co = netlist_add(net, [15], [1], [0])
    assert s.tolist() == [0] and co.tolist() == [1]
