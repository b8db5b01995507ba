"""Equivalence sweeps: MCLA gate model and netlist against plain integer addition."""

from __future__ import annotations

from dataclasses import dataclass
import itertools

import numpy as np

from .errors import ConfigError
from .fixed_point import MAX_WIDTH
from .mcla import (
    Netlist,
    _block_carries,
    _group_pg,
    mcla_add_array,
    netlist_add,
)
from .sources import make_rng

EXHAUSTIVE_MAX_WIDTH = 10


@dataclass(frozen=True)
class VerifyReport:
    what: str
    width: int
    cases: int
    mismatches: int

    @property
    def passed(self) -> bool:
        return self.mismatches == 0

    def __str__(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{self.what} width={self.width} cases={self.cases} "
            f"mismatches={self.mismatches} {verdict}"
        )


def behavioral_add(a, b, c0, width: int) -> tuple[np.ndarray, np.ndarray]:
    """Reference: signed sum mod 2**width and bit ``width`` of the raw-pattern sum."""
    mask = (1 << width) - 1
    half = 1 << (width - 1)
    if width <= 61:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        c0 = np.asarray(c0, dtype=np.int64)
        raw = (a & mask) + (b & mask) + c0
        s = ((raw + half) & mask) - half
        return s, raw >> width
    s, co = [], []
    for x, y, c in zip(np.asarray(a).tolist(), np.asarray(b).tolist(), np.asarray(c0).tolist()):
        raw = (x & mask) + (y & mask) + c
        s.append(((raw + half) & mask) - half)
        co.append(raw >> width)
    return np.array(s, dtype=np.int64), np.array(co, dtype=np.int64)


def _operands(width: int, mode: str, n: int, seed: int):
    lo, hi = -(1 << (width - 1)), (1 << (width - 1)) - 1
    if mode == "exhaustive":
        if width > EXHAUSTIVE_MAX_WIDTH:
            raise ConfigError(
                f"exhaustive sweeps are capped at width {EXHAUSTIVE_MAX_WIDTH}, got {width}"
            )
        v = np.arange(lo, hi + 1, dtype=np.int64)
        A, B, C = np.meshgrid(v, v, np.array([0, 1], np.int64), indexing="ij")
        return A.ravel(), B.ravel(), C.ravel()
    if mode == "random":
        rng = make_rng(seed)
        A = rng.integers(lo, hi, n, endpoint=True, dtype=np.int64)
        B = rng.integers(lo, hi, n, endpoint=True, dtype=np.int64)
        C = rng.integers(0, 1, n, endpoint=True, dtype=np.int64)
        return A, B, C
    raise ConfigError(f"mode must be 'exhaustive' or 'random', got {mode!r}")


def verify_adder(width: int, mode: str = "exhaustive", n: int = 10 ** 6, seed: int = 1) -> VerifyReport:
    if not 1 <= width <= MAX_WIDTH:
        raise ConfigError(f"adder width must be in [1, {MAX_WIDTH}], got {width}")
    A, B, C = _operands(width, mode, n, seed)
    s, co = mcla_add_array(A, B, C, width)
    s_ref, co_ref = behavioral_add(A, B, C, width)
    bad = int(np.count_nonzero((s != s_ref) | (co != co_ref)))
    return VerifyReport(f"mcla-{mode}", width, int(A.size), bad)


def verify_block_identity() -> VerifyReport:
    """Ripple-form c4 against ``G_G | (P_G & c0)`` over every block input."""
    bad = 0
    cases = 0
    for bits in itertools.product((0, 1), repeat=9):
        a = bits[0:4]
        b = bits[4:8]
        c0 = bits[8]
        p = [x ^ y for x, y in zip(a, b)]
        g = [x & y for x, y in zip(a, b)]
        c4 = _block_carries(*p, *g, c0)[3]
        pg, gg = _group_pg(*p, *g)
        bad += c4 != (gg | (pg & c0))
        cases += 1
    return VerifyReport("block-c4-identity", 4, cases, int(bad))


def verify_netlist(net: Netlist, mode: str = "random", n: int = 10 ** 4, seed: int = 1) -> VerifyReport:
    w = net.width
    A, B, C = _operands(w, mode, n, seed)
    mask = np.uint64((1 << w) - 1) if w < 64 else np.uint64(2 ** 64 - 1)
    s_raw, co = netlist_add(net, A.astype(np.uint64) & mask, B.astype(np.uint64) & mask, C)
    s_ref, co_ref = mcla_add_array(A, B, C, w)
    ref_raw = s_ref.astype(np.uint64) & mask
    bad = int(np.count_nonzero((s_raw != ref_raw) | (co.astype(np.int64) != co_ref)))
    return VerifyReport(f"netlist-{mode}", w, int(A.size), bad)
