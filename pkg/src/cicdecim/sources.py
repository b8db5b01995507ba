"""Test signals: quantized tones, impulses, DC, uniform noise and a 1-bit
second-order sigma-delta modulator.

Every random source draws from ``numpy.random.Generator(PCG64(seed))`` so
streams are identical across platforms for a given 64-bit seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigError, ContractError
from .fixed_point import max_value, min_value


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & (2 ** 64 - 1)))


def round_half_away(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return (np.sign(v) * np.floor(np.abs(v) + 0.5)).astype(np.int64)


def gen_sine(amp: float, f: float, fs: float, n: int, width: int, phase: float = 0.0) -> np.ndarray:
    """``amp * sin(2 pi f t + phase)`` scaled to ``2**(width-1) - 1`` and rounded."""
    if not 0 <= amp <= 1:
        raise ConfigError(f"amplitude must be a fraction of full scale, got {amp}")
    if not 0 <= f < fs / 2:
        raise ConfigError(f"tone frequency {f} must be below fs/2 = {fs / 2}")
    t = np.arange(n)
    return round_half_away(amp * max_value(width) * np.sin(2 * np.pi * f / fs * t + phase))


def gen_impulse(n: int, amplitude: int = 1, at: int = 0) -> np.ndarray:
    x = np.zeros(n, np.int64)
    if n:
        x[at] = amplitude
    return x


def gen_dc(n: int, value: int) -> np.ndarray:
    return np.full(n, value, np.int64)


def gen_noise(n: int, width: int, seed: int) -> np.ndarray:
    """Uniform integers over the full signed ``width``-bit range."""
    return make_rng(seed).integers(min_value(width), max_value(width), n, endpoint=True)


@dataclass
class SdmState:
    int1: float = 0.0
    int2: float = 0.0
    y: float = 1.0  # last quantizer output; sign(0) is taken as +1
    quantizer_levels: int = 2
    clip_limit: float = 64.0
    saturations: int = 0


@njit(cache=True)
def _sdm_loop(u, int1, int2, y, clip):
    n = u.shape[0]
    out = np.empty(n, np.int64)
    sat = 0
    for i in range(n):
        int1 += u[i] - y
        if int1 > clip:
            int1 = clip
            sat += 1
        elif int1 < -clip:
            int1 = -clip
            sat += 1
        int2 += int1 - y
        if int2 > clip:
            int2 = clip
            sat += 1
        elif int2 < -clip:
            int2 = -clip
            sat += 1
        y = 1.0 if int2 >= 0.0 else -1.0
        out[i] = 1 if y > 0 else -1
    return out, int1, int2, y, sat


def sdm_modulate(state: SdmState, u, width: int = 2) -> np.ndarray:
    """Second-order error-feedback modulator; emits +1/-1 integers.

    Signal transfer is 1, noise transfer ``(1 - z^-1)^2``.
    Inputs must stay within +-0.9 for loop stability.
    """
    if state.quantizer_levels != 2:
        raise ConfigError("only the 1-bit (2-level) quantizer is implemented")
    if width < 2:
        raise ConfigError("+1 needs a word of at least 2 bits")
    u = np.ascontiguousarray(u, dtype=float)
    if u.size and np.max(np.abs(u)) > 0.9:
        raise ContractError("modulator input must stay within [-0.9, 0.9]")
    out, state.int1, state.int2, state.y, sat = _sdm_loop(
        u, state.int1, state.int2, state.y, state.clip_limit
    )
    state.saturations += int(sat)
    return out


def sdm_sine(
    amp: float,
    f: float,
    fs: float,
    n: int,
    seed: int = 0,
    dither: float = 0.0,
    width: int = 2,
) -> np.ndarray:
    """Modulate a tone whose starting phase (and optional dither) come from ``seed``."""
    rng = make_rng(seed)
    phase = rng.uniform(0, 2 * np.pi)
    u = amp * np.sin(2 * np.pi * f / fs * np.arange(n) + phase)
    if dither:
        u = u + dither * rng.uniform(-1, 1, n)
    return sdm_modulate(SdmState(), u, width)
