import pytest
from hypothesis import given, strategies as st

from cicdecim.errors import ConfigError, ContractError
from cicdecim.fixed_point import (
    FixedWord,
    add_wrap,
    max_value,
    min_value,
    resize_extend,
    truncate_lsb,
    wrap,
)

widths = st.integers(min_value=1, max_value=64)


@st.composite
def words(draw, width=None):
    w = draw(widths) if width is None else width
    return FixedWord(draw(st.integers(min_value(w), max_value(w))), w)


def test_wrap_examples():
    assert wrap(0, 8) == FixedWord(0, 8)
    assert wrap(128, 8) == FixedWord(-128, 8)
    assert wrap(16 ** 5, 20) == FixedWord(0, 20)
    assert wrap(2 ** 20 % 2 ** 20, 20).value == 0


@pytest.mark.parametrize("width", [0, 65, -3])
def test_wrap_rejects_bad_width(width):
    with pytest.raises(ConfigError):
        wrap(1, width)


def test_fixedword_rejects_out_of_range():
    with pytest.raises(ContractError):
        FixedWord(128, 8)


def test_add_wrap_examples():
    assert add_wrap(FixedWord(3, 8), FixedWord(5, 8)) == FixedWord(8, 8)
    assert add_wrap(FixedWord(127, 8), FixedWord(1, 8)) == FixedWord(-128, 8)
    assert add_wrap(FixedWord(-1, 25), FixedWord(1, 25)) == FixedWord(0, 25)
    with pytest.raises(ContractError):
        add_wrap(FixedWord(1, 8), FixedWord(1, 9))


def test_truncate_examples():
    x = FixedWord(-1234, 25)
    assert truncate_lsb(x, 25) == x
    assert truncate_lsb(FixedWord(13, 5), 3) == FixedWord(3, 3)
    assert truncate_lsb(FixedWord(-1, 8), 4) == FixedWord(-1, 4)
    with pytest.raises(ContractError):
        truncate_lsb(FixedWord(1, 4), 5)


def test_resize_examples():
    assert resize_extend(FixedWord(-1, 6), 25) == FixedWord(-1, 25)
    assert resize_extend(FixedWord(31, 6), 25) == FixedWord(31, 25)
    assert resize_extend(FixedWord(7, 6), 6) == FixedWord(7, 6)
    with pytest.raises(ContractError):
        resize_extend(FixedWord(1, 6), 5)


def test_truncate_matches_floor_exhaustively():
    for w in range(1, 11):
        for v in range(min_value(w), max_value(w) + 1):
            a = FixedWord(v, w)
            for w_new in range(1, w + 1):
                t = truncate_lsb(a, w_new)
                assert t.width == w_new
                assert t.value == v // 2 ** (w - w_new)
                # dropped quantity in input LSBs
                assert 0 <= v - t.value * 2 ** (w - w_new) < 2 ** (w - w_new)


@given(st.integers(-(2 ** 80), 2 ** 80), widths)
def test_wrap_periodic(v, w):
    assert wrap(v + 2 ** w, w) == wrap(v, w)
    assert wrap(v, w).value % 2 ** w == v % 2 ** w


@given(words())
def test_rewrap_is_identity(a):
    assert wrap(a.value, a.width) == a


@given(st.data(), widths)
def test_add_wrap_associative_commutative(data, w):
    a, b, c = (data.draw(words(w)) for _ in range(3))
    assert add_wrap(a, b) == add_wrap(b, a)
    assert add_wrap(add_wrap(a, b), c) == add_wrap(a, add_wrap(b, c))


@given(st.data())
def test_extend_then_truncate_roundtrip(data):
    a = data.draw(words())
    w_new = data.draw(st.integers(a.width, 64))
    wide = resize_extend(a, w_new)
    assert wide.value == a.value
    # truncating back drops the extension's LSB-side bits, so shift up first
    shifted = FixedWord(a.value << (w_new - a.width), w_new)
    assert truncate_lsb(shifted, a.width) == a


def test_raw_and_bits():
    a = FixedWord(-2, 4)
    assert a.raw == 0b1110
    assert a.bits() == [0, 1, 1, 1]
    assert FixedWord.from_raw(0b1110, 4) == a
