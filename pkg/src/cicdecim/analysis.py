"""Windowed one-sided spectra, in-band SNR and CSV export."""

from __future__ import annotations

from dataclasses import dataclass
import os

import numpy as np
from scipy.signal import get_window

from .errors import ContractError, MeasurementError, SampleIOError

DB_FLOOR = -400.0
WINDOWS = ("rectangular", "hann")
DEFAULT_LEAKAGE = {"rectangular": 0, "hann": 3}


@dataclass(frozen=True)
class Spectrum:
    fs: float
    bin_freqs: np.ndarray
    mags_db: np.ndarray  # amplitude re full scale, coherent-gain corrected
    window: str
    coherent_gain: float
    enbw: float  # equivalent noise bandwidth, in bins
    length: int
    full_scale: float = 1.0

    @property
    def bin_width(self) -> float:
        return self.fs / self.length

    def powers(self) -> np.ndarray:
        """Per-bin power re full scale squared.

        Normalized so the bins sum to the mean-square value of the input
        (exactly for the rectangular window, on average for noise otherwise).
        """
        amp = 10.0 ** (self.mags_db / 20.0)
        p = amp ** 2 / self.enbw
        p[1:-1] /= 2.0
        return p


def _window(name: str, n: int) -> np.ndarray:
    if name == "rectangular":
        return np.ones(n)
    if name == "hann":
        return get_window("hann", n)  # periodic: exact for on-bin tones
    raise ContractError(f"unknown window {name!r}; choose from {WINDOWS}")


def spectrum(signal, fs: float, window: str = "hann", full_scale: float = 1.0) -> Spectrum:
    x = np.asarray(signal, dtype=float)
    n = x.size
    if n < 256 or n & (n - 1):
        raise ContractError(f"spectrum length must be a power of two >= 256, got {n}")
    w = _window(window, n)
    cg = w.mean()
    enbw = n * np.sum(w ** 2) / np.sum(w) ** 2
    X = np.fft.rfft(x * w)
    amp = np.abs(X) / (n * cg)
    amp[1:-1] *= 2.0
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(amp / full_scale)
    db = np.maximum(db, DB_FLOOR)
    freqs = np.arange(n // 2 + 1) * (fs / n)
    return Spectrum(float(fs), freqs, db, window, float(cg), float(enbw), n, float(full_scale))


def measure_snr(
    spec: Spectrum,
    f_signal: float,
    band: tuple[float, float],
    signal_leakage_bins: int | None = None,
) -> float:
    """In-band SNR in dB.

    Signal power is the tone bin plus ``signal_leakage_bins`` on each side;
    noise is every other bin in ``band`` except DC and its first neighbour.
    """
    f_lo, f_hi = band
    if not 0 <= f_lo <= f_signal <= f_hi <= spec.fs / 2:
        raise ContractError(
            f"need 0 <= f_lo <= f_signal <= f_hi <= fs/2, got {f_lo}, {f_signal}, {f_hi}"
        )
    if signal_leakage_bins is None:
        signal_leakage_bins = DEFAULT_LEAKAGE.get(spec.window, 3)
    p = spec.powers()
    k = int(round(f_signal / spec.bin_width))
    lo = max(k - signal_leakage_bins, 0)
    hi = min(k + signal_leakage_bins, p.size - 1)
    p_sig = p[lo:hi + 1].sum()

    in_band = (spec.bin_freqs >= f_lo) & (spec.bin_freqs <= f_hi)
    in_band[:2] = False
    in_band[lo:hi + 1] = False
    if not in_band.any():
        raise MeasurementError("no noise bins left in band after exclusions")
    p_noise = p[in_band].sum()
    return float(10.0 * np.log10(p_sig / p_noise))


def format_csv(freqs, mags_db) -> str:
    lines = ["freq_hz,mag_db"]
    lines.extend(f"{f:.9g},{m:.9g}" for f, m in zip(freqs, mags_db))
    return "\n".join(lines) + "\n"


def export_csv(data, path) -> None:
    """Write ``freq_hz,mag_db`` rows for a Spectrum or a ``(freqs, mags_db)`` pair."""
    if isinstance(data, Spectrum):
        freqs, mags = data.bin_freqs, data.mags_db
    else:
        freqs, mags = data
    if len(freqs) != len(mags):
        raise ContractError("frequency and magnitude columns differ in length")
    text = format_csv(freqs, mags)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise SampleIOError(f"cannot write CSV {os.fspath(path)!r}: {exc}") from exc


def read_csv(path) -> tuple[np.ndarray, np.ndarray]:
    try:
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip()
            rows = [line.split(",") for line in fh if line.strip()]
    except OSError as exc:
        raise SampleIOError(f"cannot read CSV {os.fspath(path)!r}: {exc}") from exc
    if header != "freq_hz,mag_db":
        raise ContractError(f"unexpected CSV header {header!r}")
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]
