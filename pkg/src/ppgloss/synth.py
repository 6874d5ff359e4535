"""Parametric synthetic PPG with analytically known beat geometry.

Each beat is a systolic Gaussian (amplitude 1) followed by a diastolic
Gaussian (amplitude ``diastolic_amp``) ``diastolic_delay_s`` later.  Bump
widths are Gaussian standard deviations in seconds.  The default diastolic
width is narrow enough to leave a dicrotic notch while keeping the
fundamental the dominant spectral line for 48-180 bpm.

Reported peak times are maxima of the summed waveform, not the bump
centres: at high rates the previous beat's diastolic bump rides on the next
upstroke and pulls the systolic maximum earlier.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from scipy.optimize import minimize_scalar

from .errors import BadConfigError
from .signals import SampledSignal


@dataclass(frozen=True)
class SynthConfig:
    hr_bpm: float = 72.0
    fs: float = 100.0
    duration_s: float = 10.0
    systolic_width_s: float = 0.12
    diastolic_amp: float = 0.4
    diastolic_delay_s: float = 0.30
    diastolic_width_s: float = 0.05
    systolic_offset_s: float = 0.15
    beat_jitter_s: float = 0.0
    seed: int = 0

    @property
    def period_s(self) -> float:
        return 60.0 / self.hr_bpm

    def validate(self):
        if not (30.0 <= self.hr_bpm <= 300.0):
            raise BadConfigError(f"hr_bpm must lie in [30, 300], got {self.hr_bpm}")
        if self.fs <= 0 or self.duration_s <= 0:
            raise BadConfigError("fs and duration_s must be positive")
        if self.systolic_width_s <= 0 or self.diastolic_width_s <= 0:
            raise BadConfigError("bump widths must be positive")
        if not (0.0 <= self.diastolic_amp < 1.0):
            raise BadConfigError(f"diastolic_amp must lie in [0, 1), got {self.diastolic_amp}")
        if not (0.0 < self.diastolic_delay_s < self.period_s):
            raise BadConfigError("diastolic_delay_s must be positive and below the beat period")
        if not (0.0 <= self.systolic_offset_s < self.period_s):
            raise BadConfigError("systolic_offset_s must lie within the beat period")
        if self.beat_jitter_s < 0:
            raise BadConfigError("beat_jitter_s must be nonnegative")


@dataclass(frozen=True)
class NoiseConfig:
    white_sigma: float = 0.0
    baseline_amp: float = 0.0
    baseline_freq_hz: float = 0.2
    seed: int = 0


@dataclass(frozen=True)
class SynthMeta:
    """True peak times of the visible beats.

    ``diastolic_times_s`` is NaN for beats whose diastolic bump does not
    form a local maximum, and empty when ``diastolic_amp == 0``.
    """

    hr_bpm: float
    beat_starts_s: np.ndarray = field(repr=False)
    systolic_times_s: np.ndarray = field(repr=False)
    diastolic_times_s: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "hr_bpm": self.hr_bpm,
            "beat_starts_s": [float(f"{t:.12g}") for t in self.beat_starts_s],
            "systolic_peak_times_s": [float(f"{t:.12g}") for t in self.systolic_times_s],
            "diastolic_peak_times_s": [None if np.isnan(t) else float(f"{t:.12g}")
                                       for t in self.diastolic_times_s],
        }


def _beat_starts(cfg: SynthConfig) -> np.ndarray:
    count = int(np.ceil(cfg.duration_s / cfg.period_s))
    # one extra beat on each side so the record edges look like the interior
    starts = np.arange(-1, count + 1) * cfg.period_s
    if cfg.beat_jitter_s > 0:
        rng = np.random.default_rng(cfg.seed)
        starts = starts + rng.normal(0.0, cfg.beat_jitter_s, starts.size)
    return starts


def _model(t, starts, cfg: SynthConfig):
    sys_c = starts + cfg.systolic_offset_s
    dia_c = sys_c + cfg.diastolic_delay_s
    out = np.exp(-0.5 * ((t[:, None] - sys_c[None, :]) / cfg.systolic_width_s) ** 2).sum(axis=1)
    if cfg.diastolic_amp > 0:
        dia = np.exp(-0.5 * ((t[:, None] - dia_c[None, :]) / cfg.diastolic_width_s) ** 2)
        out += cfg.diastolic_amp * dia.sum(axis=1)
    return out


def _refine_max(cfg, starts, center, half_width):
    """Local maximum of the waveform within ``center +/- half_width``, or NaN."""
    lo, hi = center - half_width, center + half_width
    res = minimize_scalar(lambda t: -_model(np.array([t]), starts, cfg)[0], bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-10})
    edge = 1e-6 * half_width
    return float(res.x) if lo + edge < res.x < hi - edge else np.nan


def synth_ppg_meta(cfg: SynthConfig) -> tuple[SampledSignal, SynthMeta]:
    cfg.validate()
    n = int(round(cfg.duration_s * cfg.fs))
    if n < 1:
        raise BadConfigError("duration shorter than one sample")
    t = np.arange(n) / cfg.fs
    starts = _beat_starts(cfg)
    x = _model(t, starts, cfg)
    is_visible = (starts >= 0) & (starts < cfg.duration_s)
    sys_all = np.array([_refine_max(cfg, starts, c, cfg.systolic_width_s)
                        for c in starts + cfg.systolic_offset_s])
    sys_t = sys_all[is_visible]
    dia_t = np.array([])
    if cfg.diastolic_amp > 0:
        dia_t = np.array([_refine_max(cfg, starts, c + cfg.diastolic_delay_s, cfg.diastolic_width_s)
                          for c in starts[is_visible] + cfg.systolic_offset_s])
        # a bump merged into the next upstroke is that beat's systolic maximum
        merged = np.any(np.abs(dia_t[:, None] - sys_all[None, :]) < 1e-6, axis=1)
        dia_t[merged] = np.nan
    meta = SynthMeta(hr_bpm=cfg.hr_bpm, beat_starts_s=starts[is_visible],
                     systolic_times_s=sys_t, diastolic_times_s=dia_t)
    return SampledSignal(x, cfg.fs), meta


def synth_ppg(cfg: SynthConfig) -> SampledSignal:
    return synth_ppg_meta(cfg)[0]


def synth_model(cfg: SynthConfig, t) -> np.ndarray:
    """Evaluate the noise-free waveform at arbitrary times (oracle use)."""
    cfg.validate()
    return _model(np.asarray(t, dtype=np.float64), _beat_starts(cfg), cfg)


def add_noise(signal: SampledSignal, cfg: NoiseConfig) -> SampledSignal:
    """Add seeded white Gaussian noise and a baseline-wander sinusoid."""
    if cfg.white_sigma < 0 or cfg.baseline_amp < 0:
        raise BadConfigError("noise amplitudes must be nonnegative")
    x = signal.samples.copy()
    if cfg.white_sigma > 0:
        rng = np.random.default_rng(cfg.seed)
        x += rng.normal(0.0, cfg.white_sigma, x.size)
    if cfg.baseline_amp > 0:
        x += cfg.baseline_amp * np.sin(2 * np.pi * cfg.baseline_freq_hz * signal.times)
    return signal.with_samples(x)
