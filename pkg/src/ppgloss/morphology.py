"""PPG and SDPPG fiducial points.

Beats are delimited by onsets: the lowest sample between consecutive
prominent systolic peaks.  Within a beat the systolic peak is the global
maximum, the dicrotic notch the first local minimum after it that is
followed by a real rise, and the diastolic peak the local maximum ending
that rise.  SDPPG a-e waves are alternating extrema of the smoothed second
difference.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np
from scipy.signal import find_peaks

from .errors import NoBeatsError
from .signals import SampledSignal, _second_difference_array

PPG_FEATURES = ("onset", "systolic_peak", "dicrotic_notch", "diastolic_peak")
SDPPG_FEATURES = ("a", "b", "c", "d", "e")


@dataclass
class BeatFiducials:
    onset: int
    systolic_peak: int
    dicrotic_notch: int | None = None
    diastolic_peak: int | None = None
    a: int | None = None
    b: int | None = None
    c: int | None = None
    d: int | None = None
    e: int | None = None

    def present(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}


@dataclass
class FiducialSet:
    beats: list = field(default_factory=list)
    fs: float = 1.0

    def __len__(self):
        return len(self.beats)

    def diastolic_rate(self) -> float:
        """Fraction of beats with a detected diastolic peak."""
        if not self.beats:
            return 0.0
        return sum(b.diastolic_peak is not None for b in self.beats) / len(self.beats)

    def indices(self, feature: str) -> np.ndarray:
        return np.array([getattr(b, feature) for b in self.beats if getattr(b, feature) is not None], dtype=int)

    def rows(self, signal: SampledSignal, sdppg: np.ndarray | None = None):
        """``(beat, feature, index, time_s, value)`` rows; SDPPG features use ``sdppg`` values."""
        out = []
        for k, beat in enumerate(self.beats):
            for name, idx in beat.present().items():
                src = sdppg if (name in SDPPG_FEATURES and sdppg is not None) else signal.samples
                out.append((k, name, idx, idx / self.fs, float(src[idx])))
        return out

    def to_csv(self, signal: SampledSignal, sdppg: np.ndarray | None = None) -> str:
        lines = ["beat,feature,index,time_s,value"]
        lines += [f"{k},{name},{idx},{t:.12g},{v:.12g}" for k, name, idx, t, v in self.rows(signal, sdppg)]
        return "\n".join(lines) + "\n"


def _local_max(x):
    i = np.arange(1, x.size - 1)
    return i[(x[i] > x[i - 1]) & (x[i] >= x[i + 1])]


def _local_min(x):
    i = np.arange(1, x.size - 1)
    return i[(x[i] < x[i - 1]) & (x[i] <= x[i + 1])]


def _last_argmax(v, rel_tol=1e-9):
    """Index of the last entry within ``rel_tol`` (relative) of the maximum.

    Mirror-symmetric beats produce exactly tied extrema whose order would
    otherwise be decided by rounding.
    """
    top = v.max()
    return int(np.flatnonzero(v >= top - rel_tol * max(abs(top), np.finfo(float).tiny))[-1])


def _systolic_peaks(x, fs, max_hr_bpm, rel_prominence=0.5):
    span = np.ptp(x)
    if span == 0:
        return np.array([], dtype=int)
    distance = max(1, int(np.floor(fs * 60.0 / max_hr_bpm)))
    peaks, props = find_peaks(x, distance=distance, prominence=1e-12 * span)
    if peaks.size == 0:
        return peaks
    prom = props["prominences"]
    ref = np.percentile(prom, 90)
    return peaks[prom >= rel_prominence * ref]


def detect_onsets(ppg: SampledSignal, min_hr_bpm: float = 30.0, max_hr_bpm: float = 300.0) -> np.ndarray:
    """Onset sample indices, one per detected beat, strictly increasing."""
    x, fs = ppg.samples, ppg.fs
    peaks = _systolic_peaks(x, fs, max_hr_bpm)
    span = np.ptp(x)
    if peaks.size == 0:
        raise NoBeatsError("no systolic upstrokes found")
    max_gap = int(np.ceil(fs * 60.0 / min_hr_bpm))
    min_gap = int(np.floor(fs * 60.0 / max_hr_bpm))
    onsets = []
    prev = -1
    for p in peaks:
        lo = max(prev + 1, p - max_gap, 0)
        if p - lo < 1:
            prev = p
            continue
        # the sample nearest the upstroke wins a tie
        seg = x[lo:p]
        o = lo + _last_argmax(-(seg - seg.max()) / span)
        prev = p
        # the trough must be a genuine minimum, not the window edge at the signal start
        if o == 0 or x[o] >= x[p]:
            continue
        if onsets and o - onsets[-1] < min_gap:
            continue
        onsets.append(o)
    if not onsets:
        raise NoBeatsError("no qualifying beat onsets found")
    return np.array(onsets, dtype=int)


def _notch_and_diastolic(x, peak, end, min_rise):
    seg_min = [m for m in _local_min(x) if peak < m < end]
    seg_max = [m for m in _local_max(x) if peak < m < end]
    for m in seg_min:
        following = [M for M in seg_max if M > m]
        if not following:
            break
        M = following[0]
        if x[M] - x[m] >= min_rise:
            return m, M
    return None, None


def _beats_from_onsets(x, onsets, min_rise):
    if onsets.size < 2:
        raise NoBeatsError("need two onsets to delimit a beat")
    beats = []
    for start, end in zip(onsets[:-1], onsets[1:]):
        peak = start + int(np.argmax(x[start:end]))
        amp = x[peak] - x[start]
        notch, dia = _notch_and_diastolic(x, peak, end, min_rise * amp)
        beats.append(BeatFiducials(int(start), int(peak),
                                   None if notch is None else int(notch),
                                   None if dia is None else int(dia)))
    return beats


def detect_fiducials(ppg: SampledSignal, min_hr_bpm: float = 30.0, max_hr_bpm: float = 300.0,
                     min_rise: float = 0.02) -> FiducialSet:
    """Per-beat onset, systolic peak, dicrotic notch and diastolic peak.

    ``min_rise`` is the smallest notch-to-diastolic rise, as a fraction of
    the beat's onset-to-systolic amplitude, that counts as a diastolic wave.
    """
    onsets = detect_onsets(ppg, min_hr_bpm, max_hr_bpm)
    return FiducialSet(_beats_from_onsets(ppg.samples, onsets, min_rise), ppg.fs)


def smoothed_sdppg(ppg: SampledSignal, smooth_win: int = 5) -> np.ndarray:
    """Second difference of a centred moving average of the PPG."""
    if smooth_win < 1:
        raise ValueError("smooth_win must be >= 1")
    x = ppg.samples
    if smooth_win > 1:
        # edge-padded so the average does not sag at the borders
        half = smooth_win // 2
        padded = np.pad(x, (half, smooth_win - 1 - half), mode="edge")
        x = np.convolve(padded, np.ones(smooth_win) / smooth_win, mode="valid")
    return _second_difference_array(x)


def detect_sdppg_waves(ppg: SampledSignal, smooth_win: int = 5, min_hr_bpm: float = 30.0,
                       max_hr_bpm: float = 300.0, min_rise: float = 0.02) -> FiducialSet:
    """Fiducials with the SDPPG a-e waves filled in.

    ``a`` is the largest positive local maximum of the smoothed SDPPG on the
    systolic upstroke.  The search starts ``smooth_win`` samples before the
    PPG onset because the peak acceleration can precede the sampled trough.
    ``b`` is the first negative local minimum after ``a``, then ``c, d, e``
    are the next maximum, minimum, maximum up to and including the next
    onset.  When that full triple is not present, the first maximum after
    ``b`` is taken as ``e`` and ``c``/``d`` are left absent.

    Raises
    ------
    NoBeatsError
        If no beats can be delimited.
    """
    onsets = detect_onsets(ppg, min_hr_bpm, max_hr_bpm)
    fid = FiducialSet(_beats_from_onsets(ppg.samples, onsets, min_rise), ppg.fs)
    sd = smoothed_sdppg(ppg, smooth_win)
    maxima, minima = _local_max(sd), _local_min(sd)
    lead = max(1, smooth_win)
    a_waves = []
    for beat in fid.beats:
        up = maxima[(maxima >= beat.onset - lead) & (maxima < beat.systolic_peak)]
        up = up[sd[up] > 0]
        a_waves.append(int(up[_last_argmax(sd[up])]) if up.size else None)
    for k, (beat, end) in enumerate(zip(fid.beats, onsets[1:])):
        a = a_waves[k]
        if a is None:
            continue
        # e may coincide with the next beat's a wave when diastole runs into
        # the next upstroke (high rates, sinusoids)
        mx = maxima[(maxima > a) & (maxima <= end)]
        mn = minima[(minima > a) & (minima <= end)]
        neg = mn[sd[mn] < 0]
        if neg.size == 0:
            continue
        b = int(neg[0])
        beat.a, beat.b = a, b
        after_b = mx[mx > b]
        if after_b.size == 0:
            continue
        c = int(after_b[0])
        d_cand = mn[mn > c]
        e_cand = mx[mx > d_cand[0]] if d_cand.size else np.array([], dtype=int)
        if e_cand.size:
            beat.c, beat.d, beat.e = c, int(d_cand[0]), int(e_cand[0])
        else:
            beat.e = c
    return fid
