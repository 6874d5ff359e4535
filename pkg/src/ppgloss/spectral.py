"""Magnitude spectra, periodic DB4 wavelet analysis and spectral-peak heart rate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadBandError,
    BadLengthError,
    MalformedError,
    NoPeakError,
    TooShortError,
)
from .signals import SampledSignal

HR_BAND = (0.5, 5.0)
DEFAULT_LEVELS = 4

# Daubechies-4 scaling (reconstruction low-pass) filter, 8 taps, from the
# extremal-phase spectral factorization evaluated at 50 digits.
DB4_LO = np.array([
    0.2303778133088965,
    0.7148465705529157,
    0.6308807679298589,
    -0.027983769416859854,
    -0.18703481171909309,
    0.030841381835560764,
    0.0328830116668852,
    -0.010597401785069032,
])
# Quadrature mirror wavelet filter g[t] = (-1)^t h[L-1-t].
DB4_HI = np.array([(-1) ** t * DB4_LO[len(DB4_LO) - 1 - t] for t in range(len(DB4_LO))])


@dataclass(frozen=True, eq=False)
class Spectrum:
    freqs: np.ndarray
    mags: np.ndarray
    band: tuple

    def __post_init__(self):
        if len(self.freqs) != len(self.mags) or len(self.freqs) < 1:
            raise MalformedError("spectrum needs equal, nonzero numbers of bins and magnitudes")

    def peak_frequency(self) -> float:
        return float(self.freqs[int(np.argmax(self.mags))])

    def to_csv(self) -> str:
        rows = ["freq_hz,magnitude"]
        rows += [f"{f:.12g},{m:.12g}" for f, m in zip(self.freqs, self.mags)]
        return "\n".join(rows) + "\n"


@dataclass(frozen=True, eq=False)
class WaveletDecomposition:
    """Multilevel periodic DB4 coefficients; ``details`` run finest to coarsest."""

    levels: int
    approx: np.ndarray
    details: list
    source_len: int
    fs: float
    boundary_mode: str = "periodic"

    def coefficient_count(self) -> int:
        return len(self.approx) + sum(len(d) for d in self.details)

    def band_edges(self, level: int) -> tuple[float, float]:
        """Nominal frequency range of detail ``level`` (1 = finest)."""
        return self.fs / 2 ** (level + 1), self.fs / 2 ** level

    def to_dict(self) -> dict:
        return {
            "levels": self.levels,
            "fs": self.fs,
            "source_len": self.source_len,
            "boundary_mode": self.boundary_mode,
            "approx": [float(f"{v:.12g}") for v in self.approx],
            "details": [[float(f"{v:.12g}") for v in d] for d in self.details],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "WaveletDecomposition":
        return cls(
            levels=int(obj["levels"]),
            approx=np.asarray(obj["approx"], dtype=np.float64),
            details=[np.asarray(d, dtype=np.float64) for d in obj["details"]],
            source_len=int(obj["source_len"]),
            fs=float(obj["fs"]),
            boundary_mode=obj.get("boundary_mode", "periodic"),
        )


def _band_mask(freqs, band):
    f_lo, f_hi = band
    return (freqs >= f_lo) & (freqs <= f_hi)


def check_band(band, fs: float):
    f_lo, f_hi = float(band[0]), float(band[1])
    if not (0 <= f_lo < f_hi <= fs / 2):
        raise BadBandError(f"band ({f_lo}, {f_hi}) must satisfy 0 <= lo < hi <= fs/2 = {fs / 2}")
    return f_lo, f_hi


def magnitude_spectrum(signal: SampledSignal, band=HR_BAND) -> Spectrum:
    """|DFT| at bins ``k * fs / N`` restricted to ``band`` (inclusive edges)."""
    n = len(signal)
    if n < 8:
        raise TooShortError("magnitude spectrum needs at least 8 samples")
    band = check_band(band, signal.fs)
    freqs = np.fft.rfftfreq(n, d=1.0 / signal.fs)
    mags = np.abs(np.fft.rfft(signal.samples))
    mask = _band_mask(freqs, band)
    if not mask.any():
        raise BadBandError(f"no DFT bin falls inside band {band} at resolution {signal.fs / n} Hz")
    return Spectrum(freqs[mask], mags[mask], band)


# ------------------------------------------------------------------ DB4 DWT

def _analysis_step(x):
    n = x.size
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(DB4_LO.size)[None, :]) % n
    windows = x[idx]
    return windows @ DB4_LO, windows @ DB4_HI


def _synthesis_step(approx, detail):
    n = 2 * approx.size
    idx = (2 * np.arange(approx.size)[:, None] + np.arange(DB4_LO.size)[None, :]) % n
    out = np.zeros(n)
    np.add.at(out, idx, approx[:, None] * DB4_LO + detail[:, None] * DB4_HI)
    return out


def _dwt_array(x, levels):
    details = []
    approx = np.asarray(x, dtype=np.float64)
    for _ in range(levels):
        approx, d = _analysis_step(approx)
        details.append(d)
    return approx, details


def _idwt_array(approx, details):
    x = np.asarray(approx, dtype=np.float64)
    for d in reversed(details):
        x = _synthesis_step(x, np.asarray(d, dtype=np.float64))
    return x


def _check_levels(n, levels):
    if levels < 1:
        raise BadLengthError("levels must be >= 1")
    if n % (2 ** levels):
        raise BadLengthError(f"length {n} is not divisible by 2**{levels}")


def dwt_db4(signal: SampledSignal, levels: int = DEFAULT_LEVELS) -> WaveletDecomposition:
    """Orthonormal multilevel DB4 analysis with periodic extension."""
    n = len(signal)
    _check_levels(n, levels)
    approx, details = _dwt_array(signal.samples, levels)
    return WaveletDecomposition(levels, approx, details, n, signal.fs)


def idwt_db4(decomp: WaveletDecomposition) -> SampledSignal:
    levels = decomp.levels
    if levels < 1 or len(decomp.details) != levels:
        raise MalformedError(f"expected {levels} detail arrays, got {len(decomp.details)}")
    expected = decomp.source_len // 2 ** levels
    if decomp.source_len % 2 ** levels or len(decomp.approx) != expected:
        raise MalformedError("approximation length inconsistent with source length")
    for k, d in enumerate(decomp.details, start=1):
        if len(d) != decomp.source_len // 2 ** k:
            raise MalformedError(f"detail level {k} has length {len(d)}")
    return SampledSignal(_idwt_array(decomp.approx, decomp.details), decomp.fs)


def subband_centers(fs: float, levels: int) -> np.ndarray:
    """Nominal centers, coarsest first: approximation band, then details L..1."""
    approx_center = fs / 2 ** (levels + 2)
    detail_centers = [0.75 * fs / 2 ** k for k in range(levels, 0, -1)]
    return np.array([approx_center] + detail_centers)


def wavelet_mass(signal: SampledSignal, levels: int = DEFAULT_LEVELS) -> Spectrum:
    """Energy per DB4 subband, ordered by increasing nominal frequency."""
    decomp = dwt_db4(signal, levels)
    mags = [float(np.sum(decomp.approx ** 2))]
    mags += [float(np.sum(d ** 2)) for d in reversed(decomp.details)]
    return Spectrum(subband_centers(signal.fs, levels), np.array(mags), (0.0, signal.fs / 2))


def spectral_peak_hr(signal: SampledSignal, band=HR_BAND) -> float:
    """Heart rate in bpm from the in-band DFT magnitude peak.

    The peak bin is refined by fitting a parabola through it and its two
    neighbours (taken from the full spectrum, so a peak on the band edge
    still interpolates).
    """
    if signal.duration < 5.0:
        raise TooShortError(f"HR estimation needs >= 5 s, got {signal.duration:.3g} s")
    fs, n = signal.fs, len(signal)
    f_lo, f_hi = check_band((band[0], min(band[1], fs / 2)), fs)
    freqs = np.fft.rfftfreq(n, d=1.0 / fs)
    mags = np.abs(np.fft.rfft(signal.samples))
    in_band = np.flatnonzero(_band_mask(freqs, (f_lo, f_hi)))
    if in_band.size == 0 or not np.any(mags[in_band] > 0):
        raise NoPeakError("in-band spectrum is identically zero")
    k = int(in_band[np.argmax(mags[in_band])])
    offset = 0.0
    if 0 < k < mags.size - 1:
        left, mid, right = mags[k - 1], mags[k], mags[k + 1]
        denom = left - 2.0 * mid + right
        if denom < 0:
            offset = 0.5 * (left - right) / denom
    return 60.0 * (k + offset) * fs / n
