"""Two's-complement words of explicit width.

All datapath values are plain integers counted in LSBs; a :class:`FixedWord`
only adds the register width so that wrap-around and LSB dropping are
well defined. Truncation always rounds toward minus infinity (an arithmetic
right shift), which is what discarding wires does in hardware; the price is
a small negative DC bias.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError, ContractError

MAX_WIDTH = 64


def _check_width(width: int) -> None:
    if not isinstance(width, int) or isinstance(width, bool):
        raise ConfigError(f"width must be an int, got {width!r}")
    if not 1 <= width <= MAX_WIDTH:
        raise ConfigError(f"width must be in [1, {MAX_WIDTH}], got {width}")


def min_value(width: int) -> int:
    return -(1 << (width - 1))


def max_value(width: int) -> int:
    return (1 << (width - 1)) - 1


def _wrap_int(v: int, width: int) -> int:
    half = 1 << (width - 1)
    return ((v + half) & ((1 << width) - 1)) - half


@dataclass(frozen=True, slots=True)
class FixedWord:
    """A signed integer pinned to a ``width``-bit two's-complement register."""

    value: int
    width: int

    def __post_init__(self) -> None:
        _check_width(self.width)
        if not min_value(self.width) <= self.value <= max_value(self.width):
            raise ContractError(
                f"value {self.value} does not fit in {self.width} bits"
            )

    @property
    def raw(self) -> int:
        """Unsigned bit pattern of the word."""
        return self.value & ((1 << self.width) - 1)

    def bits(self) -> list[int]:
        """Bit list, index 0 = LSB."""
        raw = self.raw
        return [(raw >> i) & 1 for i in range(self.width)]

    @classmethod
    def from_raw(cls, raw: int, width: int) -> "FixedWord":
        return wrap(raw, width)

    def __repr__(self) -> str:
        return f"FixedWord({self.value}, w={self.width})"


def wrap(v: int, width: int) -> FixedWord:
    """Reduce ``v`` modulo ``2**width`` into the signed range."""
    _check_width(width)
    return FixedWord(_wrap_int(int(v), width), width)


def add_wrap(a: FixedWord, b: FixedWord) -> FixedWord:
    if a.width != b.width:
        raise ContractError(f"width mismatch: {a.width} vs {b.width}")
    return FixedWord(_wrap_int(a.value + b.value, a.width), a.width)


def truncate_lsb(a: FixedWord, width: int) -> FixedWord:
    """Drop ``a.width - width`` LSBs (floor division by a power of two)."""
    _check_width(width)
    if width > a.width:
        raise ContractError(
            f"truncate_lsb cannot widen {a.width} -> {width}; use resize_extend"
        )
    return FixedWord(a.value >> (a.width - width), width)


def resize_extend(a: FixedWord, width: int) -> FixedWord:
    """Sign-extend to a wider register; the value is unchanged."""
    _check_width(width)
    if width < a.width:
        raise ContractError(
            f"resize_extend cannot narrow {a.width} -> {width}; use truncate_lsb"
        )
    return FixedWord(a.value, width)
