"""Four-stage decimation chain: CIC /R, half-band /2, droop corrector /2, half-band /2.

The FIR stages run in fixed point: coefficients are quantized to
``frac_bits`` fractional bits (the centre tap absorbs the rounding residue so
the DC gain stays exactly one), products accumulate in int64 and each output
is rounded once, half away from zero. Only the retained output phase of
each /2 stage is computed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import signal

from .cic import (
    CicDesign,
    CicParams,
    CicState,
    frequency_response_mag,
    init_state,
    process,
)
from .errors import ConfigError, ContractError, DesignError

MAX_TAPS = 1024
SYM_TOL = 1e-12
RESPONSE_FLOOR_DB = -400.0


@dataclass(frozen=True)
class FirFilter:
    taps: np.ndarray
    symmetric: bool = False
    halfband: bool = False

    def __post_init__(self) -> None:
        taps = np.asarray(self.taps, dtype=float)
        object.__setattr__(self, "taps", taps)
        if taps.ndim != 1 or taps.size == 0:
            raise ConfigError("taps must be a non-empty vector")
        if self.symmetric and not np.allclose(taps, taps[::-1], rtol=0, atol=SYM_TOL):
            raise ConfigError("taps flagged symmetric are not")
        if self.halfband:
            L = taps.size
            if L % 2 == 0:
                raise ConfigError("a half-band filter needs an odd length")
            c = L // 2
            off = np.arange(L) - c
            zeros = taps[(off % 2 == 0) & (off != 0)]
            if np.any(np.abs(zeros) > SYM_TOL):
                raise ConfigError("half-band taps at even offsets must be zero")
            if abs(taps[c] - 0.5 * taps.sum()) > 1e-9:
                raise ConfigError("half-band centre tap must be half the DC gain")

    def __len__(self) -> int:
        return self.taps.size

    @property
    def delay(self) -> float:
        return (self.taps.size - 1) / 2

    def response(self, f) -> np.ndarray:
        """Complex response at normalized frequency ``f`` (cycles/sample)."""
        f = np.atleast_1d(np.asarray(f, dtype=float))
        n = np.arange(self.taps.size)
        return np.exp(-2j * np.pi * np.outer(f, n)) @ self.taps

    def quantize(self, frac_bits: int) -> np.ndarray:
        """Integer taps scaled by ``2**frac_bits`` with an exact DC gain."""
        q = np.round(self.taps * (1 << frac_bits)).astype(np.int64)
        c = q.size // 2
        q[c] += (1 << frac_bits) - int(q.sum())
        return q


def design_halfband(f_pass_norm: float, stop_atten_db: float = 80.0) -> FirFilter:
    """Kaiser-windowed half-band lowpass.

    ``f_pass_norm`` is the passband edge at the filter's input rate; the
    stopband starts at its mirror image ``0.5 - f_pass_norm``.
    """
    if not 0 < f_pass_norm < 0.25:
        raise ConfigError(f"half-band passband edge must be in (0, 0.25), got {f_pass_norm}")
    width = 0.5 - 2 * f_pass_norm
    numtaps, beta = signal.kaiserord(stop_atten_db, 2 * width)
    L = max(numtaps, 3)
    L += (3 - L % 4) % 4  # 4k + 3: outermost taps land on odd offsets
    grid = np.linspace(0.5 - f_pass_norm, 0.5, 2048)
    while L <= MAX_TAPS:
        h = _halfband_taps(L, beta)
        peak = np.abs(FirFilter(h).response(grid)).max()
        if 20 * np.log10(max(peak, 1e-300)) <= -stop_atten_db:
            return FirFilter(h, symmetric=True, halfband=True)
        L += 4
    raise DesignError(
        f"half-band with {stop_atten_db} dB stopband needs more than {MAX_TAPS} taps"
    )


def _halfband_taps(L: int, beta: float) -> np.ndarray:
    c = L // 2
    off = np.arange(L) - c
    h = 0.5 * np.sinc(off / 2) * np.kaiser(L, beta)
    h[(off % 2 == 0) & (off != 0)] = 0.0
    side = off != 0
    h[side] *= 0.5 / h[side].sum()
    h[c] = 0.5
    return 0.5 * (h + h[::-1])


def cic_droop(params: CicParams | None, f) -> np.ndarray:
    """CIC magnitude normalized to 1 at DC (``f`` at the CIC input rate)."""
    f = np.asarray(f, dtype=float)
    if params is None:
        return np.ones_like(f)
    return frequency_response_mag(params, f) / float(params.RM ** params.N)


def design_droop_corrector(
    cic: CicParams | None,
    f_pass_norm: float,
    length: int = 31,
    rate_ratio: int | None = None,
    stop_edge: float = 0.3,
    stopband: bool = True,
) -> FirFilter:
    """Least-squares linear-phase inverse of the CIC passband droop.

    ``f_pass_norm`` is normalized to the corrector's input rate, which is
    ``rate_ratio`` times slower than the CIC input (default ``2*R``: the
    corrector follows the CIC and one half-band). The band
    ``[f_pass_norm, stop_edge]`` is left free and ``[stop_edge, 0.5]`` is
    driven to zero, because the corrector decimates by two. ``cic=None``
    means a flat source (the result is close to a plain lowpass).

    With ``stopband=False`` the inverse is fitted over the whole band
    ``[0, 0.5]`` and nothing is driven to zero; a flat source then yields
    the identity (a lone unit centre tap).
    """
    if length < 7 or length % 2 == 0:
        raise ConfigError(f"corrector length must be odd and >= 7, got {length}")
    if not 0 < f_pass_norm < stop_edge <= 0.5:
        raise ConfigError(
            f"need 0 < f_pass_norm < {stop_edge}, got {f_pass_norm}"
        )
    if rate_ratio is None:
        rate_ratio = 2 * cic.R if cic is not None else 1
    K = (length - 1) // 2
    k = np.arange(K + 1)

    def basis(f):
        B = np.cos(2 * np.pi * np.outer(f, k))
        B[:, 1:] *= 2
        return B

    if stopband:
        fp = np.linspace(0.0, f_pass_norm, 512)
        fs = np.linspace(stop_edge, 0.5, 512)
    else:
        fp = np.linspace(0.0, 0.5, 1024)
        fs = np.zeros(0)
    target = 1.0 / cic_droop(cic, fp / rate_ratio)
    A = np.vstack([basis(fp), basis(fs)])
    b = np.concatenate([target, np.zeros(fs.size)])
    a, *_ = np.linalg.lstsq(A, b, rcond=None)
    h = np.concatenate([a[:0:-1], a])
    h /= h.sum()
    return FirFilter(h, symmetric=True)


@dataclass(frozen=True)
class ChainConfig:
    cic: CicDesign
    hb1: FirFilter
    droop: FirFilter
    hb2: FirFilter
    fs_in: float
    f_pass: float
    fixed_point_frac_bits: int = 16

    def __post_init__(self) -> None:
        if self.f_pass >= self.output_rate / 2:
            raise ConfigError(
                f"f_pass {self.f_pass} Hz must be below half the output rate "
                f"({self.output_rate / 2} Hz)"
            )
        if not 1 <= self.fixed_point_frac_bits <= 30:
            raise ConfigError("fixed_point_frac_bits must be in [1, 30]")

    @property
    def stage_factors(self) -> tuple[int, int, int, int]:
        return (self.cic.params.R, 2, 2, 2)

    @property
    def total_decimation(self) -> int:
        return int(np.prod(self.stage_factors))

    @property
    def stage_rates(self) -> list[float]:
        """Input sample rate of each stage, then the output rate."""
        rates = [float(self.fs_in)]
        for k in self.stage_factors:
            rates.append(rates[-1] / k)
        return rates

    @property
    def output_rate(self) -> float:
        return self.fs_in / (self.cic.params.R * 8)

    @property
    def firs(self) -> tuple[FirFilter, FirFilter, FirFilter]:
        return (self.hb1, self.droop, self.hb2)

    def quantized_taps(self) -> list[np.ndarray]:
        return [f.quantize(self.fixed_point_frac_bits) for f in self.firs]

    @property
    def dc_gain(self) -> float:
        """Output value per unit DC input, in output LSBs."""
        return self.cic.g_max / 2.0 ** self.cic.output_shift


def build_chain(
    cic: CicDesign,
    fs_in: float = 6_144_000.0,
    f_pass: float = 20_000.0,
    stop_atten_db: float = 80.0,
    droop_length: int = 31,
    frac_bits: int = 16,
) -> ChainConfig:
    """Design all three FIR stages for a given CIC and passband edge."""
    out_rate = fs_in / (cic.params.R * 8)
    if not 0 < f_pass < out_rate / 2:
        raise ConfigError(
            f"f_pass must be in (0, {out_rate / 2}) Hz for a {out_rate} Hz output, got {f_pass}"
        )
    fs1 = fs_in / cic.params.R
    hb1 = design_halfband(f_pass / fs1, stop_atten_db)
    droop = design_droop_corrector(cic.params, f_pass / (fs1 / 2), droop_length, 2 * cic.params.R)
    hb2 = design_halfband(f_pass / (fs1 / 4), stop_atten_db)
    return ChainConfig(cic, hb1, droop, hb2, fs_in, f_pass, frac_bits)


def round_shift(acc: np.ndarray, bits: int) -> np.ndarray:
    """Divide by ``2**bits``, rounding half away from zero."""
    half = np.int64(1) << (bits - 1)
    mag = (np.abs(acc) + half) >> bits
    return np.where(acc < 0, -mag, mag)


@dataclass
class FirDecimator:
    """Streaming fixed-point FIR followed by /2 (only kept outputs are computed)."""

    taps: np.ndarray
    frac_bits: int
    factor: int = 2
    history: np.ndarray = field(default=None)
    phase: int = 0

    def __post_init__(self) -> None:
        self.taps = np.asarray(self.taps, dtype=np.int64)
        if self.history is None:
            self.history = np.zeros(self.taps.size - 1, np.int64)

    def process(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        buf = np.concatenate([self.history, x])
        L = self.taps.size
        # first kept input index within x
        start = (-self.phase) % self.factor
        idx = np.arange(start, x.size, self.factor)
        self.phase = (self.phase + x.size) % self.factor
        self.history = buf[buf.size - (L - 1):] if L > 1 else buf[:0]
        if idx.size == 0:
            return np.zeros(0, np.int64)
        limit = int(np.abs(self.taps).sum()) * int(np.abs(buf).max(initial=0))
        if limit >= 1 << 62:
            raise ContractError("FIR accumulator would overflow int64")
        windows = sliding_window_view(buf, L)[idx]
        acc = windows @ self.taps[::-1]
        return round_shift(acc, self.frac_bits)


@dataclass
class ChainState:
    cic: CicState
    stages: list[FirDecimator]


def init_chain_state(cfg: ChainConfig, decimation_phase: int = 0) -> ChainState:
    return ChainState(
        init_state(cfg.cic, decimation_phase),
        [FirDecimator(q, cfg.fixed_point_frac_bits) for q in cfg.quantized_taps()],
    )


def chain_process(cfg: ChainConfig, samples, state: ChainState | None = None) -> np.ndarray:
    """Run input samples at ``fs_in`` through all four stages."""
    if state is None:
        state = init_chain_state(cfg)
    y = process(cfg.cic, state.cic, samples)
    for stage in state.stages:
        y = stage.process(y)
    return y


def chain_delay(cfg: ChainConfig) -> float:
    """Group delay of the whole chain in input samples."""
    p = cfg.cic.params
    delay = p.N * (p.RM - 1) / 2
    scale = p.R
    for fir in cfg.firs:
        delay += fir.delay * scale
        scale *= 2
    return delay


def chain_response(cfg: ChainConfig, freqs_hz, quantized: bool = True) -> np.ndarray:
    """Composite magnitude in dB (0 dB at DC) at input-rate frequencies in Hz."""
    f = np.asarray(freqs_hz, dtype=float)
    if np.any(f < 0) or np.any(f > cfg.fs_in / 2):
        raise ContractError(f"response grid must lie in [0, {cfg.fs_in / 2}] Hz")
    mag = cic_droop(cfg.cic.params, f / cfg.fs_in)
    rates = cfg.stage_rates[1:4]
    if quantized:
        taps = [q / float(1 << cfg.fixed_point_frac_bits) for q in cfg.quantized_taps()]
    else:
        taps = [fir.taps for fir in cfg.firs]
    for h, fs in zip(taps, rates):
        mag = mag * np.abs(FirFilter(h).response(f / fs)) / abs(h.sum())
    with np.errstate(divide="ignore"):
        db = 20 * np.log10(mag)
    return np.maximum(db, RESPONSE_FLOOR_DB)


def passband_ripple_db(db: np.ndarray) -> float:
    """Peak-to-peak spread of a dB response."""
    return float(np.max(db) - np.min(db))
