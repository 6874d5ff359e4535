"""Sampled signals, linear operators and signal file I/O."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadWindowError,
    ConstantSignalError,
    InvalidSignalError,
    TooShortError,
)


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Uniformly sampled real-valued series.

    The sample array is copied on construction and made read-only, so a
    signal behaves as a value.
    """

    samples: np.ndarray
    fs: float

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64, copy=True).ravel()
        if arr.size < 1:
            raise InvalidSignalError("signal needs at least one sample")
        if not np.all(np.isfinite(arr)):
            raise InvalidSignalError("signal samples must be finite")
        fs = float(self.fs)
        if not (math.isfinite(fs) and fs > 0):
            raise InvalidSignalError(f"sampling rate must be positive, got {self.fs}")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "fs", fs)

    def __len__(self):
        return self.samples.size

    def __eq__(self, other):
        if not isinstance(other, SampledSignal):
            return NotImplemented
        return self.fs == other.fs and np.array_equal(self.samples, other.samples)

    @property
    def duration(self) -> float:
        return self.samples.size / self.fs

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.fs

    def with_samples(self, samples) -> "SampledSignal":
        return SampledSignal(samples, self.fs)


@dataclass(frozen=True)
class PatchSet:
    patches: list = field(default_factory=list)
    window_len: int = 0
    stride: int = 0
    source_len: int = 0

    @property
    def starts(self) -> list[int]:
        return [k * self.stride for k in range(len(self.patches))]

    def __len__(self):
        return len(self.patches)


def as_signal(x, fs: float = 1.0) -> SampledSignal:
    """Wrap an array (or pass a signal through unchanged)."""
    if isinstance(x, SampledSignal):
        return x
    return SampledSignal(x, fs)


def normalize(signal: SampledSignal, mode: str = "zscore") -> SampledSignal:
    """Z-score (sample std, ddof=1) or min-max normalization."""
    x = signal.samples
    if mode == "zscore":
        sd = x.std(ddof=1) if x.size > 1 else 0.0
        if sd == 0:
            raise ConstantSignalError("zero variance, cannot z-score")
        return signal.with_samples((x - x.mean()) / sd)
    if mode == "minmax":
        lo, hi = x.min(), x.max()
        if hi <= lo:
            raise ConstantSignalError("max == min, cannot min-max normalize")
        return signal.with_samples((x - lo) / (hi - lo))
    raise ValueError(f"unknown normalization mode {mode!r}")


def _second_difference_array(x: np.ndarray) -> np.ndarray:
    if x.size < 3:
        raise TooShortError("second difference needs at least 3 samples")
    y = np.zeros_like(x)
    y[1:-1] = x[2:] - 2.0 * x[1:-1] + x[:-2]
    return y


def _second_difference_adjoint_array(g: np.ndarray) -> np.ndarray:
    if g.size < 3:
        raise TooShortError("second difference needs at least 3 samples")
    inner = g[1:-1]
    out = np.zeros_like(g)
    out[:-2] += inner
    out[1:-1] -= 2.0 * inner
    out[2:] += inner
    return out


def second_difference(signal: SampledSignal) -> SampledSignal:
    """Unscaled central second difference with both boundary outputs zeroed.

    ``y[n] = x[n+1] - 2 x[n] + x[n-1]`` for interior ``n``; ``y[0] = y[-1] = 0``.
    Output length equals input length.
    """
    return signal.with_samples(_second_difference_array(signal.samples))


def second_difference_adjoint(grad_out: SampledSignal) -> SampledSignal:
    """Transpose of :func:`second_difference` (boundary entries of the input are ignored)."""
    return grad_out.with_samples(_second_difference_adjoint_array(grad_out.samples))


def segment_patches(signal: SampledSignal, window_len: int, stride: int) -> PatchSet:
    n = len(signal)
    if not (1 <= window_len <= n) or stride < 1:
        raise BadWindowError(f"invalid window_len={window_len}, stride={stride} for length {n}")
    count = (n - window_len) // stride + 1
    x = signal.samples
    patches = [signal.with_samples(x[k * stride:k * stride + window_len]) for k in range(count)]
    return PatchSet(patches=patches, window_len=window_len, stride=stride, source_len=n)


# ---------------------------------------------------------------- file I/O

def _reject_constant(name):
    raise InvalidSignalError(f"non-finite value {name} in signal file")


def signal_from_dict(obj: dict) -> SampledSignal:
    try:
        return SampledSignal(np.asarray(obj["samples"], dtype=np.float64), float(obj["fs"]))
    except (KeyError, TypeError) as exc:
        raise InvalidSignalError(f"signal JSON needs 'fs' and 'samples': {exc}") from None


def signal_to_dict(signal: SampledSignal) -> dict:
    return {"fs": round_sig(signal.fs), "samples": [round_sig(v) for v in signal.samples]}


def round_sig(value: float, digits: int = 12) -> float:
    """Round to ``digits`` significant digits (output serialization convention)."""
    return float(f"{float(value):.{digits}g}")


def read_signal(path) -> SampledSignal:
    """Read a signal from JSON (``{"fs", "samples"}``) or CSV (``fs=<Hz>`` header)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("fs="):
            raise InvalidSignalError(f"{path}: CSV signal must start with 'fs=<Hz>'")
        fs = float(lines[0][3:])
        values = np.array([float(v) for v in lines[1:]])
        return SampledSignal(values, fs)
    return signal_from_dict(json.loads(text, parse_constant=_reject_constant))


def format_signal_csv(signal: SampledSignal) -> str:
    rows = [f"fs={signal.fs:.12g}"] + [f"{v:.12g}" for v in signal.samples]
    return "\n".join(rows) + "\n"
