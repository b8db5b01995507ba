"""Cascaded integrator-comb decimator: sizing, closed-form response, simulation.

The simulated datapath is bit-accurate: every integrator and comb add goes
through the MCLA gate model at the register width of its stage. Widths may
shrink from stage to stage (LSB truncation). All registers are MSB-aligned,
so a register of width ``w`` counts in units of ``2**(w0 - w)`` first-stage
LSBs, where ``w0`` is the first integrator width.

Width conventions
-----------------
``output_msb`` returns Hogenauer's B_max, the index of the output MSB when
bits are numbered from 0. A two's-complement register that can hold every
output of a full-scale input therefore needs ``B_max + 1`` bits; that is the
default ("full width") schedule. Schedules whose first stage is exactly
``B_max`` bits wide (the classic 25-bit configuration) are accepted but can
overflow on the last bit of headroom for extreme inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import accumulate
import math
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from .errors import ConfigError, ContractError
from .fixed_point import MAX_WIDTH, FixedWord, max_value, min_value
from .mcla import mcla_kernel

IMPULSE_GUARD = 1 << 20


@dataclass(frozen=True)
class CicParams:
    N: int
    M: int
    R: int
    B_in: int

    def __post_init__(self) -> None:
        for name in ("N", "M", "R", "B_in"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise ConfigError(f"{name} must be an integer, got {v!r}")
        if self.N < 1:
            raise ConfigError(f"N (stage count) must be >= 1, got {self.N}")
        if self.M < 1:
            raise ConfigError(f"M (differential delay) must be >= 1, got {self.M}")
        if self.R < 2:
            raise ConfigError(f"R (decimation factor) must be >= 2, got {self.R}")
        if not 1 <= self.B_in <= 32:
            raise ConfigError(f"B_in must be in [1, 32], got {self.B_in}")

    @property
    def RM(self) -> int:
        return self.R * self.M


def register_growth(params: CicParams) -> int:
    """Maximum register growth ``(R*M)**N`` (exact integer)."""
    return params.RM ** params.N


def output_msb(params: CicParams) -> int:
    """B_max = ceil(N*log2(R*M) + B_in - 1), computed without floating point."""
    return (register_growth(params) * (1 << (params.B_in - 1)) - 1).bit_length()


@dataclass(frozen=True)
class CicDesign:
    params: CicParams
    g_max: int
    b_max: int
    integrator_widths: tuple[int, ...]
    comb_widths: tuple[int, ...]

    @property
    def full_width(self) -> int:
        """Register width that holds every output of a full-scale input."""
        return self.b_max + 1

    @property
    def output_width(self) -> int:
        return self.comb_widths[-1]

    @property
    def output_shift(self) -> int:
        """Bits dropped between the first integrator and the output."""
        return self.integrator_widths[0] - self.comb_widths[-1]

    @property
    def comb_input_widths(self) -> tuple[int, ...]:
        """Width at which each comb stage subtracts."""
        return (self.comb_widths[0],) + self.comb_widths[:-1]

    @property
    def is_full_width(self) -> bool:
        w = self.integrator_widths[0]
        return w >= self.full_width and all(
            x == w for x in self.integrator_widths + self.comb_widths
        )


def _check_schedule(name: str, widths: Sequence[int], n: int) -> tuple[int, ...]:
    widths = tuple(int(w) for w in widths)
    if len(widths) != n:
        raise ConfigError(f"{name} needs {n} entries, got {len(widths)}")
    for w in widths:
        if not 1 <= w <= MAX_WIDTH:
            raise ConfigError(f"{name} entry {w} outside [1, {MAX_WIDTH}]")
    if any(b > a for a, b in zip(widths, widths[1:])):
        raise ConfigError(f"{name} must be non-increasing, got {list(widths)}")
    return widths


def design(
    params: CicParams,
    integrator_widths: Sequence[int] | None = None,
    comb_widths: Sequence[int] | None = None,
) -> CicDesign:
    """Size a CIC decimator.

    Without a schedule every register is ``b_max + 1`` bits (lossless).
    With only ``integrator_widths`` the combs run at the last integrator
    width.
    """
    g_max = register_growth(params)
    b_max = output_msb(params)
    if integrator_widths is None:
        full = b_max + 1
        if full > MAX_WIDTH:
            raise ConfigError(
                f"full-width registers need {full} bits, above the {MAX_WIDTH}-bit cap"
            )
        integrator_widths = [full] * params.N
    iw = _check_schedule("integrator_widths", integrator_widths, params.N)
    if iw[0] < b_max:
        raise ConfigError(
            f"first integrator width {iw[0]} < B_max = {b_max}: MSBs would be lost"
        )
    if comb_widths is None:
        comb_widths = [iw[-1]] * params.N
    cw = _check_schedule("comb_widths", comb_widths, params.N)
    if cw[0] > iw[-1]:
        raise ConfigError(
            f"comb width {cw[0]} exceeds last integrator width {iw[-1]}"
        )
    return CicDesign(params, g_max, b_max, iw, cw)


# -- closed forms ------------------------------------------------------------


def _boxcar_power(length: int, power: int) -> list[int]:
    h = [1]
    for _ in range(power):
        # convolve with ones(length) via a running window sum
        prefix = [0, *accumulate(h)]
        n_out = len(h) + length - 1
        h = [
            prefix[min(k + 1, len(h))] - prefix[max(k - length + 1, 0)]
            for k in range(n_out)
        ]
    return h


def impulse_response(params: CicParams) -> list[int]:
    """Coefficients of ``(1 + z^-1 + ... + z^-(RM-1))**N`` as exact ints."""
    if params.RM * params.N > IMPULSE_GUARD:
        raise ConfigError(
            f"R*M*N = {params.RM * params.N} exceeds the expansion guard {IMPULSE_GUARD}"
        )
    return _boxcar_power(params.RM, params.N)


def frequency_response_mag(params: CicParams, f):
    """|H| at normalized frequency ``f`` (cycles/sample at the input rate).

    Not normalized: the DC value is the full gain ``(R*M)**N``.
    """
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr < 0) or np.any(f_arr > 0.5):
        raise ContractError("frequency must lie in [0, 0.5]")
    RM, N = params.RM, params.N
    den = np.sin(np.pi * f_arr)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den == 0, float(RM), np.sin(np.pi * f_arr * RM) / den)
    mag = np.abs(ratio) ** N
    return float(mag) if mag.ndim == 0 else mag


def _poly_mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _comb_power(delay: int, power: int) -> list[int]:
    """Coefficients of ``(1 - z^-delay)**power``."""
    h = [0] * (delay * power + 1)
    for k in range(power + 1):
        h[k * delay] = (-1) ** k * math.comb(power, k)
    return h


def truncation_error_bound(design: CicDesign) -> int:
    """Worst-case |truncated - exact| output error, in output LSBs.

    A site that narrows a register to width ``w`` injects an error of less
    than one LSB of width ``w``; that error reaches the output through the
    stages downstream of the site, whose impulse response has absolute
    coefficient sum L1. The bound is ``ceil(sum over sites of
    2**(w_out - w) * L1)``.

    Assumes the first integrator holds the full output range (``b_max + 1``
    bits); a narrower first stage can wrap on near full-scale input, which
    no LSB-level bound covers.
    """
    p = design.params
    N, RM = p.N, p.RM
    iw, cw, cin = design.integrator_widths, design.comb_widths, design.comb_input_widths
    w_out = cw[-1]
    total = Fraction(0)

    for j in range(1, N):
        if iw[j] < iw[j - 1]:
            h = _poly_mul(_boxcar_power(RM, N - j), _comb_power(RM, j))
            total += Fraction(sum(abs(c) for c in h)) * Fraction(2) ** (w_out - iw[j])
    if cw[0] < iw[-1]:
        total += Fraction(2 ** N) * Fraction(2) ** (w_out - cw[0])
    for j in range(N):
        if cw[j] < cin[j]:
            total += Fraction(2 ** (N - 1 - j)) * Fraction(2) ** (w_out - cw[j])
    return math.ceil(total)


# -- streaming simulation -------------------------------------------------------


@dataclass
class CicState:
    """Registers of one running filter. Create with :func:`init_state`."""

    integrator_accs: np.ndarray
    comb_delays: np.ndarray
    delay_index: int = 0
    phase: int = 0
    decimation_phase: int = 0
    wraps: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    samples_in: int = 0
    samples_out: int = 0
    mode: str | None = None

    def accumulators(self, design: CicDesign) -> list[FixedWord]:
        return [
            FixedWord(int(v), w)
            for v, w in zip(self.integrator_accs, design.integrator_widths)
        ]


def init_state(design: CicDesign, decimation_phase: int = 0) -> CicState:
    """All-zero state. The downsampler keeps input samples n with n % R == phase."""
    p = design.params
    if not 0 <= decimation_phase < p.R:
        raise ConfigError(f"decimation phase must be in [0, {p.R}), got {decimation_phase}")
    return CicState(
        integrator_accs=np.zeros(p.N, np.int64),
        comb_delays=np.zeros((p.N, p.M), np.int64),
        decimation_phase=decimation_phase,
        wraps=np.zeros(p.N, np.int64),
    )


@njit(cache=True)
def _run(x, iw, cw, R, accs, delays, didx, phase, dphase, wraps, pipelined):
    N = accs.shape[0]
    M = delays.shape[1]
    n = x.shape[0]
    out = np.empty(n // R + 1, np.int64)
    n_out = 0
    for t in range(n):
        if pipelined:
            # each stage consumes the previous stage's register from the
            # last clock: update from the tail so old values are still visible
            for j in range(N - 1, -1, -1):
                if j == 0:
                    v = x[t]
                else:
                    v = accs[j - 1] >> (iw[j - 1] - iw[j])
                w = iw[j]
                s, _ = mcla_kernel(accs[j], v, 0, w)
                total = accs[j] + v
                if total != s:
                    wraps[j] += 1
                accs[j] = s
        else:
            v = x[t]
            for j in range(N):
                if j > 0:
                    v = accs[j - 1] >> (iw[j - 1] - iw[j])
                w = iw[j]
                s, _ = mcla_kernel(accs[j], v, 0, w)
                total = accs[j] + v
                if total != s:
                    wraps[j] += 1
                accs[j] = s
        if phase == dphase:
            v = accs[N - 1] >> (iw[N - 1] - cw[0])
            for j in range(N):
                w = cw[0] if j == 0 else cw[j - 1]
                d = delays[j, didx]
                delays[j, didx] = v
                y, _ = mcla_kernel(v, ~d, 1, w)
                v = y >> (w - cw[j])
            didx += 1
            if didx == M:
                didx = 0
            out[n_out] = v
            n_out += 1
        phase += 1
        if phase == R:
            phase = 0
    return out[:n_out], didx, phase


def _as_samples(samples, width: int) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        x = samples
    else:
        items = list(samples)
        if items and isinstance(items[0], FixedWord):
            for s in items:
                if s.width != width:
                    raise ContractError(f"input word width {s.width} != B_in {width}")
            items = [s.value for s in items]
        x = np.asarray(items, dtype=np.int64)
    if x.size and not np.issubdtype(x.dtype, np.integer):
        raise ContractError(f"input samples must be integers, got {x.dtype}")
    x = np.ascontiguousarray(x, dtype=np.int64).reshape(-1)
    if x.size and (x.min() < min_value(width) or x.max() > max_value(width)):
        raise ContractError(f"input samples exceed the {width}-bit input range")
    return x


def _process(design: CicDesign, state: CicState, samples, mode: str) -> np.ndarray:
    p = design.params
    if state.integrator_accs.shape != (p.N,) or state.comb_delays.shape != (p.N, p.M):
        raise ContractError("state was not initialised for this design")
    if state.mode is not None and state.mode != mode:
        raise ContractError(f"state already used for {state.mode} processing")
    state.mode = mode
    x = _as_samples(samples, p.B_in)
    out, didx, phase = _run(
        x,
        np.asarray(design.integrator_widths, np.int64),
        np.asarray(design.comb_widths, np.int64),
        p.R,
        state.integrator_accs,
        state.comb_delays,
        state.delay_index,
        state.phase,
        state.decimation_phase,
        state.wraps,
        mode == "pipelined",
    )
    state.delay_index, state.phase = int(didx), int(phase)
    state.samples_in += x.size
    state.samples_out += out.size
    return out


def process(design: CicDesign, state: CicState, samples: Iterable) -> np.ndarray:
    """Filter and decimate a stream of ``B_in``-bit samples.

    Returns the low-rate output values (``design.output_width``-bit words,
    in units of ``2**design.output_shift`` input LSBs). Streaming: call
    repeatedly with consecutive chunks and the same state.
    """
    return _process(design, state, samples, "direct")


def process_pipelined(design: CicDesign, state: CicState, samples: Iterable) -> np.ndarray:
    """As :func:`process`, with a register between integrator stages.

    The integrator accumulators double as the pipeline registers, so no
    storage is added; the output lags :func:`process` by ``N - 1`` input
    samples. The comb section is unchanged.
    """
    return _process(design, state, samples, "pipelined")


def simulate(design: CicDesign, samples, decimation_phase: int = 0, pipelined: bool = False) -> np.ndarray:
    """One-shot helper: fresh state, whole stream."""
    state = init_state(design, decimation_phase)
    fn = process_pipelined if pipelined else process
    return fn(design, state, samples)
