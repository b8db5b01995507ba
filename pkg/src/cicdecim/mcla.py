"""Modified carry look-ahead adder (MCLA), modelled gate by gate.

Per bit ``g = a AND b`` and ``p = a XOR b``. Four bits form a block that
produces its internal carries c1..c4 by two-level AND/OR logic and also a
group propagate/generate pair. Blocks are chained LSB first; the carry into
block k+1 is ``G_G | (P_G & c0)`` of block k. Sum bit i is ``p_i ^ c_i``.

Operand widths that are not a multiple of four are padded by sign
extension and the sum is cut back to the original width. Subtraction is
addition of the bitwise complement with carry-in 1.

The same block equations are emitted as a structural netlist
(:func:`emit_netlist`) and replayed by :func:`evaluate_netlist`, so the
structural and functional views can be checked against each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np
from numba import njit

from .errors import ConfigError, ContractError
from .fixed_point import MAX_WIDTH, FixedWord


class PgPair(NamedTuple):
    p: int
    g: int


class GroupPg(NamedTuple):
    P_G: int
    G_G: int


# -- gate equations (jitted, shared by every caller) -------------------------


@njit(cache=True, inline="always")
def _bit_pg(a, b):
    return a ^ b, a & b


@njit(cache=True, inline="always")
def _group_pg(p0, p1, p2, p3, g0, g1, g2, g3):
    pg = p3 & p2 & p1 & p0
    gg = g3 | (p3 & g2) | (p3 & p2 & g1) | (p3 & p2 & p1 & g0)
    return pg, gg


@njit(cache=True, inline="always")
def _block_carries(p0, p1, p2, p3, g0, g1, g2, g3, c0):
    c1 = g0 | (p0 & c0)
    c2 = g1 | (p1 & g0) | (p1 & p0 & c0)
    c3 = g2 | (p2 & g1) | (p2 & p1 & g0) | (p2 & p1 & p0 & c0)
    c4 = (
        g3
        | (p3 & g2)
        | (p3 & p2 & g1)
        | (p3 & p2 & p1 & g0)
        | (p3 & p2 & p1 & p0 & c0)
    )
    return c1, c2, c3, c4


@njit(cache=True)
def mcla_kernel(a, b, c0, width):
    """Add two sign-extended int64 words; returns (wrapped sum, carry out).

    ``a`` and ``b`` must already lie in the signed ``width``-bit range, so
    every bit at or above ``width - 1`` equals the sign and padding to the
    next multiple of four needs no extra work.
    """
    nblocks = (width + 3) // 4
    s = np.int64(0)
    c = np.int64(c0)
    cout = np.int64(0)
    one = np.int64(1)
    for k in range(nblocks):
        base = 4 * k
        p0, g0 = _bit_pg((a >> base) & one, (b >> base) & one)
        p1, g1 = _bit_pg((a >> (base + 1)) & one, (b >> (base + 1)) & one)
        p2, g2 = _bit_pg((a >> (base + 2)) & one, (b >> (base + 2)) & one)
        p3, g3 = _bit_pg((a >> (base + 3)) & one, (b >> (base + 3)) & one)
        c1, c2, c3, c4 = _block_carries(p0, p1, p2, p3, g0, g1, g2, g3, c)
        pg, gg = _group_pg(p0, p1, p2, p3, g0, g1, g2, g3)
        s |= (p0 ^ c) << base
        if base + 1 < width:
            s |= (p1 ^ c1) << (base + 1)
        if base + 2 < width:
            s |= (p2 ^ c2) << (base + 2)
        if base + 3 < width:
            s |= (p3 ^ c3) << (base + 3)
        rem = width - base
        if rem == 1:
            cout = c1
        elif rem == 2:
            cout = c2
        elif rem == 3:
            cout = c3
        c = gg | (pg & c)
    if width % 4 == 0:
        cout = c
    if width < 64:
        s &= (one << width) - one
        if (s >> (width - 1)) & one:
            s -= one << width
    return s, cout


@njit(cache=True)
def mcla_add_array(a, b, c0, width):
    """Element-wise :func:`mcla_kernel` over int64 arrays."""
    n = a.shape[0]
    s = np.empty(n, np.int64)
    co = np.empty(n, np.int64)
    for i in range(n):
        s[i], co[i] = mcla_kernel(a[i], b[i], c0[i], width)
    return s, co


# -- public bit-level API ------------------------------------------------------


def _bit(x: int) -> int:
    if x not in (0, 1):
        raise ContractError(f"expected a bit, got {x!r}")
    return int(x)


def bit_pg(a: int, b: int) -> PgPair:
    p, g = _bit_pg(_bit(a), _bit(b))
    return PgPair(int(p), int(g))


def _unpack4(pg: Sequence[PgPair]) -> tuple[list[int], list[int]]:
    if len(pg) != 4:
        raise ContractError(f"a block takes exactly 4 PgPairs, got {len(pg)}")
    return [_bit(x.p) for x in pg], [_bit(x.g) for x in pg]


def group_pg(pg: Sequence[PgPair]) -> GroupPg:
    """Group propagate / generate of a 4-bit block (index 0 = LSB)."""
    p, g = _unpack4(pg)
    P, G = _group_pg(*p, *g)
    return GroupPg(int(P), int(G))


def block_carries(pg: Sequence[PgPair], c0: int) -> tuple[int, int, int, int]:
    p, g = _unpack4(pg)
    return tuple(int(c) for c in _block_carries(*p, *g, _bit(c0)))


def mcla_add(a: FixedWord, b: FixedWord, c0: int = 0) -> tuple[FixedWord, int]:
    """Add two same-width words through the gate model.

    Returns the wrapped sum and the carry out of the MSB position, i.e.
    bit ``width`` of ``a.raw + b.raw + c0``.
    """
    if a.width != b.width:
        raise ContractError(f"width mismatch: {a.width} vs {b.width}")
    s, co = mcla_kernel(np.int64(a.value), np.int64(b.value), _bit(c0), a.width)
    return FixedWord(int(s), a.width), int(co)


def mcla_sub(a: FixedWord, b: FixedWord) -> FixedWord:
    """``a - b`` as ``a + ~b + 1``."""
    if a.width != b.width:
        raise ContractError(f"width mismatch: {a.width} vs {b.width}")
    s, _ = mcla_add(a, FixedWord(~b.value, b.width), 1)
    return s


# -- structural netlist ----------------------------------------------------------

GATE_KINDS = ("AND", "OR", "XOR")


class Gate(NamedTuple):
    kind: str
    out: str
    ins: tuple[str, ...]


@dataclass(frozen=True)
class Netlist:
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    gates: tuple[Gate, ...]

    @property
    def width(self) -> int:
        return sum(1 for name in self.inputs if name.startswith("a["))

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def group_blocks(self) -> int:
        """Number of 4-bit blocks carrying a group P/G pair."""
        return sum(1 for g in self.gates if g.out.startswith("PG["))


def emit_netlist(width: int) -> Netlist:
    """Structural MCLA of ``width`` bits (a multiple of 4, at most 64)."""
    if not isinstance(width, int) or width < 4 or width % 4 or width > MAX_WIDTH:
        raise ConfigError(
            f"netlist width must be a multiple of 4 in [4, {MAX_WIDTH}], got {width}"
        )
    a = [f"a[{i}]" for i in range(width)]
    b = [f"b[{i}]" for i in range(width)]
    inputs = (*a, *b, "c0")
    outputs = (*(f"sum[{i}]" for i in range(width)), "cout")
    gates: list[Gate] = []
    add = gates.append

    p = [f"p[{i}]" for i in range(width)]
    g = [f"g[{i}]" for i in range(width)]
    for i in range(width):
        add(Gate("XOR", p[i], (a[i], b[i])))
        add(Gate("AND", g[i], (a[i], b[i])))

    carry_in = "c0"
    for k in range(width // 4):
        base = 4 * k
        P = p[base:base + 4]
        G = g[base:base + 4]
        c0 = carry_in
        tag = f"{k}"

        def term(name: str, ins: tuple[str, ...]) -> str:
            add(Gate("AND", name, ins))
            return name

        # intra-block carries c1..c3
        c1 = f"c[{base + 1}]"
        add(Gate("OR", c1, (G[0], term(f"t1_0[{tag}]", (P[0], c0)))))
        c2 = f"c[{base + 2}]"
        add(Gate("OR", c2, (
            G[1],
            term(f"t2_0[{tag}]", (P[1], G[0])),
            term(f"t2_1[{tag}]", (P[1], P[0], c0)),
        )))
        c3 = f"c[{base + 3}]"
        add(Gate("OR", c3, (
            G[2],
            term(f"t3_0[{tag}]", (P[2], G[1])),
            term(f"t3_1[{tag}]", (P[2], P[1], G[0])),
            term(f"t3_2[{tag}]", (P[2], P[1], P[0], c0)),
        )))
        # group signals and the block carry out
        add(Gate("AND", f"PG[{k}]", (P[3], P[2], P[1], P[0])))
        add(Gate("OR", f"GG[{k}]", (
            G[3],
            term(f"tg_0[{tag}]", (P[3], G[2])),
            term(f"tg_1[{tag}]", (P[3], P[2], G[1])),
            term(f"tg_2[{tag}]", (P[3], P[2], P[1], G[0])),
        )))
        last = base + 4 == width
        c4 = "cout" if last else f"c[{base + 4}]"
        add(Gate("OR", c4, (f"GG[{k}]", term(f"tl[{tag}]", (f"PG[{k}]", c0)))))

        for i, c in enumerate((c0, c1, c2, c3)):
            add(Gate("XOR", f"sum[{base + i}]", (P[i], c)))
        carry_in = c4

    return Netlist(inputs, outputs, tuple(gates))


def check_netlist(net: Netlist) -> None:
    """Raise if the netlist is not topologically ordered or leaves dangling logic."""
    defined = set(net.inputs)
    used: set[str] = set(net.outputs)
    for gate in net.gates:
        if gate.kind not in GATE_KINDS:
            raise ContractError(f"unknown gate kind {gate.kind!r}")
        for name in gate.ins:
            if name not in defined:
                raise ContractError(f"{gate.out}: input {name} used before definition")
        if gate.out in defined:
            raise ContractError(f"signal {gate.out} driven twice")
        defined.add(gate.out)
        used.update(gate.ins)
    missing = [o for o in net.outputs if o not in defined]
    if missing:
        raise ContractError(f"undriven outputs: {missing}")
    dangling = [g.out for g in net.gates if g.out not in used]
    if dangling:
        raise ContractError(f"dangling gate outputs: {dangling}")


def evaluate_netlist(net: Netlist, inputs: Mapping[str, object]) -> dict[str, object]:
    """Evaluate every gate in order.

    Input values may be ints (0/1) or equal-length integer numpy arrays, in
    which case all vectors are simulated at once.
    """
    env: dict[str, object] = {}
    for name in net.inputs:
        try:
            env[name] = inputs[name]
        except KeyError:
            raise ContractError(f"missing netlist input {name}") from None
    for kind, out, ins in net.gates:
        acc = env[ins[0]]
        if kind == "AND":
            for name in ins[1:]:
                acc = acc & env[name]
        elif kind == "OR":
            for name in ins[1:]:
                acc = acc | env[name]
        else:
            for name in ins[1:]:
                acc = acc ^ env[name]
        env[out] = acc
    return {name: env[name] for name in net.outputs}


def netlist_add(net: Netlist, a_raw, b_raw, c0) -> tuple[np.ndarray, np.ndarray]:
    """Drive the netlist with raw (unsigned) operand patterns.

    Returns the raw sum pattern and the carry out, as arrays.
    """
    w = net.width
    a_raw = np.asarray(a_raw, dtype=np.uint64)
    b_raw = np.asarray(b_raw, dtype=np.uint64)
    c0 = np.asarray(c0, dtype=np.uint64)
    one = np.uint64(1)
    ins: dict[str, object] = {"c0": c0 & one}
    for i in range(w):
        ins[f"a[{i}]"] = (a_raw >> np.uint64(i)) & one
        ins[f"b[{i}]"] = (b_raw >> np.uint64(i)) & one
    out = evaluate_netlist(net, ins)
    s = np.zeros(np.broadcast(a_raw, b_raw, c0).shape, dtype=np.uint64)
    for i in range(w):
        s |= np.asarray(out[f"sum[{i}]"], dtype=np.uint64) << np.uint64(i)
    return s, np.asarray(out["cout"], dtype=np.uint64)


def format_netlist(net: Netlist) -> str:
    lines = [
        "input " + " ".join(net.inputs),
        "output " + " ".join(net.outputs),
    ]
    lines.extend(f"{g.kind} {g.out} {' '.join(g.ins)}" for g in net.gates)
    return "\n".join(lines) + "\n"


def parse_netlist(text: str) -> Netlist:
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    gates: list[Gate] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        fields = line.split()
        if not fields:
            continue
        head, rest = fields[0], fields[1:]
        if head == "input":
            inputs = tuple(rest)
        elif head == "output":
            outputs = tuple(rest)
        elif head in GATE_KINDS and len(rest) >= 2:
            gates.append(Gate(head, rest[0], tuple(rest[1:])))
        else:
            raise ContractError(f"netlist line {lineno}: cannot parse {line!r}")
    return Netlist(inputs, outputs, tuple(gates))
