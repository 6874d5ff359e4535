"""Waveform-fidelity and heart-rate accuracy metrics.

The library functions compare raw samples; callers that want dimensionless
comparisons should z-score first (the CLI ``eval`` command does).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import ConstantInputError, EmptyInputError, LengthMismatchError
from .signals import SampledSignal
from .spectral import HR_BAND, spectral_peak_hr


def _values(x) -> np.ndarray:
    if isinstance(x, SampledSignal):
        return x.samples
    return np.asarray(x, dtype=np.float64).ravel()


def _same_length(a, b, what):
    if a.size != b.size:
        raise LengthMismatchError(f"{what} needs equal lengths, got {a.size} and {b.size}")


def _pow2_scaled(v):
    """``v`` divided by a power of two near its largest magnitude (exact), or None if zero."""
    top = np.max(np.abs(v))
    if top == 0:
        return None
    return np.ldexp(v, -int(np.frexp(top)[1]))


def pearson(x, y) -> float:
    """Centered (Pearson) correlation coefficient.

    Parameters
    ----------
    x, y : SampledSignal or array_like
        Equal-length sequences with at least two samples.

    Returns
    -------
    float
        Correlation in ``[-1, 1]``.

    Raises
    ------
    ConstantInputError
        If either input has zero variance.
    """
    a, b = _values(x), _values(y)
    _same_length(a, b, "pearson")
    if a.size < 2:
        raise LengthMismatchError("pearson needs at least two samples")
    # rescale before and after centering so tiny or huge inputs keep full precision
    da, db = _pow2_scaled(a), _pow2_scaled(b)
    if da is not None and db is not None:
        da, db = _pow2_scaled(da - da.mean()), _pow2_scaled(db - db.mean())
    if da is None or db is None:
        raise ConstantInputError("pearson is undefined for a constant input")
    saa, sbb = float(da @ da), float(db @ db)
    r = float(da @ db) / np.sqrt(saa * sbb)
    return float(min(1.0, max(-1.0, r)))


def rmse(x, y) -> float:
    """Root mean squared difference."""
    a, b = _values(x), _values(y)
    _same_length(a, b, "rmse")
    if a.size == 0:
        raise EmptyInputError("rmse of empty inputs")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def frechet(x, y) -> float:
    """Discrete Frechet distance between two scalar sequences.

    Uses the coupling recursion
    ``C[i, j] = max(d(i, j), min(C[i-1, j-1], C[i-1, j], C[i, j-1]))``
    with ``d`` the absolute difference.  Lengths may differ.

    Raises
    ------
    EmptyInputError
        If either sequence is empty.
    """
    a, b = _values(x), _values(y)
    if a.size == 0 or b.size == 0:
        raise EmptyInputError("frechet needs two nonempty sequences")
    dist = np.ascontiguousarray(np.abs(a[:, None] - b[None, :]))
    return float(_backend.frechet_dp(dist))


@dataclass(frozen=True)
class HrSeriesPair:
    """Predicted and reference heart-rate series in bpm."""

    hr_pred: np.ndarray
    hr_true: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.hr_pred, dtype=np.float64).ravel()
        t = np.asarray(self.hr_true, dtype=np.float64).ravel()
        if p.size == 0 or t.size == 0:
            raise EmptyInputError("heart-rate series must be nonempty")
        _same_length(p, t, "HrSeriesPair")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(t))) or np.any(p <= 0) or np.any(t <= 0):
            raise ValueError("heart rates must be finite and positive")
        object.__setattr__(self, "hr_pred", p)
        object.__setattr__(self, "hr_true", t)


def hr_error_stats(pair: HrSeriesPair) -> dict:
    """MAE, RMSE and Pearson ``r`` between predicted and true HR series.

    Raises
    ------
    ConstantInputError
        If either series is constant (``r`` undefined).
    """
    delta = pair.hr_pred - pair.hr_true
    return {
        "mae_bpm": float(np.mean(np.abs(delta))),
        "rmse_bpm": float(np.sqrt(np.mean(delta ** 2))),
        "r": pearson(pair.hr_pred, pair.hr_true),
    }


def hr_series(signal: SampledSignal, win_s: float = 10.0, hop_s: float = 5.0, band=HR_BAND) -> np.ndarray:
    """Spectral-peak HR (bpm) over sliding windows.

    A record shorter than ``win_s`` yields a single estimate from the whole
    record (which must still span the 5 s minimum of
    :func:`~ppgloss.spectral.spectral_peak_hr`).
    """
    win = int(round(win_s * signal.fs))
    hop = max(1, int(round(hop_s * signal.fs)))
    if len(signal) <= win:
        return np.array([spectral_peak_hr(signal, band)])
    starts = range(0, len(signal) - win + 1, hop)
    return np.array([spectral_peak_hr(signal.with_samples(signal.samples[s:s + win]), band) for s in starts])
