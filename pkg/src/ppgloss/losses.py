"""Multi-domain PPG losses with analytic gradients.

Every differentiable loss returns ``(value, grad)`` where ``grad`` has the
length of the predicted signal.  Three domains are covered: the raw time
series, its DB4 wavelet subband energies (frequency) and its second
difference (SD).  :func:`total_loss` combines eight terms with weights
``alpha`` (time), ``beta`` (frequency) and ``gamma_sd`` (second derivative).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import (
    DimensionMismatchError,
    EmptyInputError,
    LengthMismatchError,
    RateMismatchError,
    TooShortError,
    ZeroMassError,
    ZeroSpectrumError,
)
from .signals import (
    SampledSignal,
    _second_difference_adjoint_array,
    _second_difference_array,
)
from .spectral import DEFAULT_LEVELS, _dwt_array, _idwt_array, check_band

TERM_NAMES = (
    "dtw_t",
    "sparsity_t",
    "variance_t",
    "sparsity_f",
    "variance_f",
    "dtw_sd",
    "sparsity_sd",
    "variance_sd",
)
TIME_TERMS = ("dtw_t", "sparsity_t", "variance_t")
FREQ_TERMS = ("sparsity_f", "variance_f")
SD_TERMS = ("dtw_sd", "sparsity_sd", "variance_sd")


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 1.5
    beta: float = 0.8
    gamma_sd: float = 1.2

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma_sd) < 0:
            raise ValueError("loss weights must be nonnegative")

    def weight_of(self, term: str) -> float:
        if term in TIME_TERMS:
            return self.alpha
        if term in FREQ_TERMS:
            return self.beta
        return self.gamma_sd

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "gamma_sd": self.gamma_sd}


@dataclass(frozen=True)
class SoftDtwConfig:
    gamma: float = 1.0
    cost: str = "squared_euclidean"

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma >= 0):
            raise ValueError(f"soft-DTW gamma must be finite and >= 0, got {self.gamma}")
        if self.cost != "squared_euclidean":
            raise ValueError(f"unsupported cost {self.cost!r}")


@dataclass(frozen=True)
class SparsityFreqConfig:
    """Frequency-domain settings.

    ``band`` and ``delta_f`` (Hz) drive the off-peak spectral ratio;
    ``wavelet_levels`` sets the DB4 depth of the frequency variance term.
    """

    band: tuple = (0.5, 5.0)
    delta_f: float = 0.2
    wavelet_levels: int = DEFAULT_LEVELS

    def __post_init__(self):
        a, b = self.band
        if not (0 < a < b):
            raise ValueError(f"band must satisfy 0 < a < b, got {self.band}")
        if self.delta_f <= 0:
            raise ValueError("delta_f must be positive")
        if self.wavelet_levels < 1:
            raise ValueError("wavelet_levels must be >= 1")


@dataclass(frozen=True, eq=False)
class MassDistribution:
    """Nonnegative mass over ``d`` ordered bins, normalized to sum 1."""

    mass: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mass, dtype=np.float64).ravel()
        if m.size < 1 or np.any(m < 0) or not np.all(np.isfinite(m)):
            raise ValueError("mass must be a nonempty array of finite nonnegative values")
        if abs(m.sum() - 1.0) > 1e-9:
            raise ValueError(f"mass sums to {m.sum()}, expected 1")
        object.__setattr__(self, "mass", m)

    @classmethod
    def from_weights(cls, weights) -> "MassDistribution":
        w = np.asarray(weights, dtype=np.float64).ravel()
        total = w.sum()
        if total <= 0:
            raise ZeroMassError("cannot normalize a zero mass vector")
        return cls(w / total)

    @property
    def d(self) -> int:
        return self.mass.size

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.mass)


@dataclass(frozen=True, eq=False)
class SoftDtwWorkspace:
    cost: np.ndarray
    R: np.ndarray
    gamma: float
    E: np.ndarray | None = None
    W: np.ndarray | None = None  # forward soft-min weights, gamma > 0 only


@dataclass(eq=False)
class LossBreakdown:
    terms: dict
    total: float
    grad: np.ndarray
    weights: LossWeights = field(default_factory=LossWeights)

    def value(self, name: str) -> float:
        return self.terms[name][0]

    def to_report(self) -> dict:
        def r(v):
            return float(f"{v:.12g}")

        return {
            "terms": {name: {"value": r(self.terms[name][0])} for name in TERM_NAMES},
            "total": r(self.total),
            "weights": self.weights.to_dict(),
        }


def _samples(x) -> np.ndarray:
    if isinstance(x, SampledSignal):
        return x.samples
    return np.asarray(x, dtype=np.float64).ravel()


# ------------------------------------------------------------------ sparsity

def sparsity_time(x) -> tuple[float, np.ndarray]:
    """Sum of absolute amplitudes; subgradient 0 at exact zeros."""
    v = _samples(x)
    return float(np.abs(v).sum()), np.sign(v)


def sparsity_sd(x) -> tuple[float, np.ndarray]:
    v = _samples(x)
    if v.size < 3:
        raise TooShortError("SD sparsity needs at least 3 samples")
    sd = _second_difference_array(v)
    return float(np.abs(sd).sum()), _second_difference_adjoint_array(np.sign(sd))


def spectral_peak_freq(x, fs: float, band) -> float:
    v = _samples(x)
    freqs = np.fft.rfftfreq(v.size, d=1.0 / fs)
    mags = np.abs(np.fft.rfft(v))
    mask = (freqs >= band[0]) & (freqs <= band[1])
    if not mask.any():
        raise ZeroSpectrumError("no DFT bins inside the band")
    idx = np.flatnonzero(mask)
    return float(freqs[idx[np.argmax(mags[idx])]])


def sparsity_freq(x: SampledSignal, cfg: SparsityFreqConfig = SparsityFreqConfig(),
                  peak_hz: float | None = None) -> tuple[float, np.ndarray]:
    """Fraction of in-band DFT magnitude lying outside ``peak +/- delta_f``.

    The peak location is treated as a constant when differentiating; pass
    ``peak_hz`` to pin it explicitly (finite-difference checks do).
    """
    v, fs = x.samples, x.fs
    n = v.size
    if n < 8:
        raise TooShortError("frequency sparsity needs at least 8 samples")
    band = check_band((cfg.band[0], min(cfg.band[1], fs / 2)), fs)
    X = np.fft.rfft(v)
    freqs = np.fft.rfftfreq(n, d=1.0 / fs)
    mags = np.abs(X)
    in_band = np.flatnonzero((freqs >= band[0]) & (freqs <= band[1]))
    if in_band.size == 0:
        raise ZeroSpectrumError("no DFT bins inside the band")
    F = mags[in_band]
    total = F.sum()
    if total <= 0:
        raise ZeroSpectrumError("in-band spectrum is identically zero")
    if peak_hz is None:
        peak_hz = float(freqs[in_band[np.argmax(F)]])
    tol = 1e-9 * fs
    outside = np.abs(freqs[in_band] - peak_hz) > cfg.delta_f + tol
    value = float(F[outside].sum() / total)

    # d value / d F_k = (1[outside] - value) / total, chained through |X_k|.
    dF = (outside.astype(np.float64) - value) / total
    phase = np.zeros(n, dtype=np.complex128)
    nz = F > 0
    phase[in_band[nz]] = dF[nz] * np.conj(X[in_band[nz]]) / F[nz]
    grad = np.real(np.fft.fft(phase))
    return value, grad


# ------------------------------------------------------------------ variance

def variance_loss(q: MassDistribution, p: MassDistribution) -> float:
    """Mean squared difference of the two cumulative distributions."""
    if q.d != p.d:
        raise DimensionMismatchError(f"mass dimensions differ: {q.d} vs {p.d}")
    diff = q.cdf() - p.cdf()
    return float(np.mean(diff ** 2))


def _cdf_loss(a_pred, a_ref):
    """CDF loss between unnormalized masses, gradient w.r.t. ``a_pred``."""
    s_pred, s_ref = a_pred.sum(), a_ref.sum()
    if s_pred <= 0 or s_ref <= 0:
        raise ZeroMassError("domain mass is zero, cannot build a distribution")
    m = a_pred / s_pred
    diff = np.cumsum(m) - np.cumsum(a_ref / s_ref)
    d = a_pred.size
    value = float(np.mean(diff ** 2))
    g_cdf = 2.0 * diff / d
    g_m = np.cumsum(g_cdf[::-1])[::-1]
    g_a = (g_m - np.dot(g_m, m)) / s_pred
    return value, g_a


def _pad_pow2(v, levels):
    block = 2 ** levels
    extra = (-v.size) % block
    return np.concatenate([v, np.zeros(extra)]) if extra else v


def _wavelet_energies(v, levels):
    approx, details = _dwt_array(_pad_pow2(v, levels), levels)
    bands = [approx] + details[::-1]
    return approx, details, np.array([np.sum(c ** 2) for c in bands])


def domain_mass(x: SampledSignal, domain: str, levels: int = DEFAULT_LEVELS) -> np.ndarray:
    """Unnormalized mass vector of ``x`` in ``time``, ``freq`` or ``sd``."""
    v = x.samples
    if domain == "time":
        return np.abs(v)
    if domain == "sd":
        return np.abs(_second_difference_array(v))
    if domain == "freq":
        return _wavelet_energies(v, levels)[2]
    raise ValueError(f"unknown domain {domain!r}")


def variance_loss_domain(x_pred: SampledSignal, x_ref: SampledSignal, domain: str,
                         levels: int = DEFAULT_LEVELS) -> tuple[float, np.ndarray]:
    """CDF (variance) loss on a domain's normalized mass, gradient w.r.t. ``x_pred``.

    Frequency-domain signals whose length is not a multiple of ``2**levels``
    are zero-padded before the wavelet transform.
    """
    if len(x_pred) != len(x_ref):
        raise LengthMismatchError(f"lengths differ: {len(x_pred)} vs {len(x_ref)}")
    v = x_pred.samples
    if domain == "time":
        value, g_a = _cdf_loss(np.abs(v), np.abs(x_ref.samples))
        return value, g_a * np.sign(v)
    if domain == "sd":
        sd = _second_difference_array(v)
        value, g_a = _cdf_loss(np.abs(sd), domain_mass(x_ref, "sd"))
        return value, _second_difference_adjoint_array(g_a * np.sign(sd))
    if domain == "freq":
        approx, details, energies = _wavelet_energies(v, levels)
        value, g_a = _cdf_loss(energies, domain_mass(x_ref, "freq", levels))
        # d energy_b / d c = 2 c for each coefficient of band b; band order
        # is approx, then details coarsest to finest.
        g_approx = 2.0 * g_a[0] * approx
        g_details = [2.0 * g_a[levels - k] * details[k] for k in range(levels)]
        grad = _idwt_array(g_approx, g_details)[:v.size]
        return value, grad
    raise ValueError(f"unknown domain {domain!r}")


# ------------------------------------------------------------------ soft-DTW

def _cost_matrix(x, y):
    return np.ascontiguousarray((x[:, None] - y[None, :]) ** 2)


def soft_dtw(x, y, cfg: SoftDtwConfig = SoftDtwConfig(), symmetric: bool = False
             ) -> tuple[float, SoftDtwWorkspace]:
    """Soft-DTW over the squared-difference cost; ``gamma == 0`` is classical DTW.

    ``symmetric=True`` asserts ``x is y`` and lets the compiled kernel fill
    only half of the table.
    """
    xv, yv = _samples(x), _samples(y)
    if xv.size == 0 or yv.size == 0:
        raise EmptyInputError("soft-DTW needs nonempty sequences")
    D = _cost_matrix(xv, yv)
    if cfg.gamma == 0:
        R = _backend.soft_dtw_forward(D, 0.0)
        return float(R[xv.size, yv.size]), SoftDtwWorkspace(D, R, 0.0)
    R, W = _backend.soft_dtw_forward_weights(D, cfg.gamma, symmetric)
    return float(R[xv.size, yv.size]), SoftDtwWorkspace(D, R, cfg.gamma, W=W)


def _hard_alignment(R, n, m):
    E = np.zeros((n, m))
    i, j = n, m
    E[i - 1, j - 1] = 1.0
    while (i, j) != (1, 1):
        steps = ((i - 1, j - 1), (i - 1, j), (i, j - 1))
        i, j = min(steps, key=lambda ij: R[ij])
        E[i - 1, j - 1] = 1.0
    return E


def expected_alignment(ws: SoftDtwWorkspace) -> np.ndarray:
    """E[A]: soft occupancy of each cell (a 0/1 optimal path when gamma == 0)."""
    n, m = ws.cost.shape
    if ws.gamma == 0:
        return _hard_alignment(ws.R, n, m)
    if ws.W is not None:
        return _backend.soft_dtw_backward_weights(ws.W)
    return _backend.soft_dtw_backward(ws.cost, ws.R, ws.gamma)


def _grad_from_alignment(E, xv, yv):
    # d/dx_i of sum_ij E_ij (x_i - y_j)^2
    return 2.0 * (xv * E.sum(axis=1) - E @ yv)


def soft_dtw_value_and_grad(x, y, cfg: SoftDtwConfig = SoftDtwConfig(), symmetric: bool = False):
    xv, yv = _samples(x), _samples(y)
    value, ws = soft_dtw(xv, yv, cfg, symmetric)
    E = expected_alignment(ws)
    return value, _grad_from_alignment(E, xv, yv)


def soft_dtw_grad(x, y, cfg: SoftDtwConfig = SoftDtwConfig()) -> np.ndarray:
    """Gradient of :func:`soft_dtw` with respect to ``x``."""
    return soft_dtw_value_and_grad(x, y, cfg)[1]


def soft_dtw_divergence(x, y, cfg: SoftDtwConfig = SoftDtwConfig(),
                        v_yy: float | None = None) -> tuple[float, np.ndarray]:
    """Debiased soft-DTW: ``sdtw(x, y) - (sdtw(x, x) + sdtw(y, y)) / 2``.

    Zero with zero gradient when ``x == y``.  Because the cost is
    symmetric, the derivative of ``sdtw(x, x)`` in ``x`` is twice the
    first-argument gradient, which cancels the factor 1/2.  ``v_yy`` may be
    passed in when ``sdtw(y, y)`` is already known.
    """
    xv, yv = _samples(x), _samples(y)
    v_xy, g_xy = soft_dtw_value_and_grad(xv, yv, cfg)
    v_xx, g_xx = soft_dtw_value_and_grad(xv, xv, cfg, symmetric=True)
    if v_yy is None:
        v_yy = soft_dtw(yv, yv, cfg, symmetric=True)[0]
    return v_xy - 0.5 * (v_xx + v_yy), g_xy - g_xx


# ------------------------------------------------------------------ total

def total_loss(x_pred: SampledSignal, x_ref: SampledSignal,
               weights: LossWeights = LossWeights(),
               cfg: SoftDtwConfig = SoftDtwConfig(),
               fcfg: SparsityFreqConfig = SparsityFreqConfig(),
               peak_hz: float | None = None, ref_cache: dict | None = None) -> LossBreakdown:
    """Weighted eight-term loss with its gradient w.r.t. ``x_pred``.

    Parameters
    ----------
    x_pred, x_ref : SampledSignal
        Candidate and reference, equal length and rate.
    weights, cfg, fcfg
        Term weights, soft-DTW and frequency-sparsity settings.
    peak_hz : float, optional
        Hold the frequency-sparsity peak fixed instead of locating it.
    ref_cache : dict, optional
        Scratch space for quantities that depend only on ``x_ref`` and
        ``cfg``; pass the same dict across calls with the same reference
        to skip recomputing them.
    """
    if len(x_pred) != len(x_ref):
        raise LengthMismatchError(f"lengths differ: {len(x_pred)} vs {len(x_ref)}")
    if x_pred.fs != x_ref.fs:
        raise RateMismatchError(f"sampling rates differ: {x_pred.fs} vs {x_ref.fs}")
    v_pred, v_ref = x_pred.samples, x_ref.samples
    sd_pred, sd_ref = _second_difference_array(v_pred), _second_difference_array(v_ref)

    cache = ref_cache if ref_cache is not None else {}
    key = (cfg.gamma, v_ref.tobytes())
    if cache.get("key") != key:
        cache.clear()
        cache["key"] = key
        cache["yy_t"] = soft_dtw(v_ref, v_ref, cfg, symmetric=True)[0]
        cache["yy_sd"] = soft_dtw(sd_ref, sd_ref, cfg, symmetric=True)[0]

    terms = {}
    terms["dtw_t"] = soft_dtw_divergence(v_pred, v_ref, cfg, cache["yy_t"])
    terms["sparsity_t"] = sparsity_time(v_pred)
    terms["variance_t"] = variance_loss_domain(x_pred, x_ref, "time")
    terms["sparsity_f"] = sparsity_freq(x_pred, fcfg, peak_hz=peak_hz)
    terms["variance_f"] = variance_loss_domain(x_pred, x_ref, "freq", fcfg.wavelet_levels)
    dv, dg = soft_dtw_divergence(sd_pred, sd_ref, cfg, cache["yy_sd"])
    terms["dtw_sd"] = (dv, _second_difference_adjoint_array(dg))
    terms["sparsity_sd"] = sparsity_sd(v_pred)
    terms["variance_sd"] = variance_loss_domain(x_pred, x_ref, "sd")

    val = {k: t[0] for k, t in terms.items()}
    total = (weights.alpha * (val["dtw_t"] + val["sparsity_t"] + val["variance_t"])
             + weights.beta * (val["sparsity_f"] + val["variance_f"])
             + weights.gamma_sd * (val["dtw_sd"] + val["sparsity_sd"] + val["variance_sd"]))
    grad = np.zeros_like(v_pred)
    for name in TERM_NAMES:
        grad += weights.weight_of(name) * terms[name][1]
    return LossBreakdown(terms=terms, total=float(total), grad=grad, weights=weights)
