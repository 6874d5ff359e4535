"""Central finite-difference verification of the analytic loss gradients."""

from __future__ import annotations

import numpy as np

from . import losses as L
from .signals import SampledSignal, _second_difference_array

LOSS_IDS = (
    "sparsity_time",
    "sparsity_sd",
    "sparsity_freq",
    "variance_time",
    "variance_freq",
    "variance_sd",
    "soft_dtw",
    "soft_dtw_divergence",
    "total",
)


def _kinks_abs(v, tol):
    return np.abs(v) < tol


def _kinks_sd(v, tol):
    # coordinate n feeds second differences at n-1, n, n+1
    near = np.abs(_second_difference_array(v))[1:-1] < tol
    mask = np.zeros(v.size, dtype=bool)
    for shift in (0, 1, 2):
        mask[shift:shift + near.size] |= near
    return mask


def _loss_fn(loss_id, ctx, x0):
    fs = ctx.get("fs", 30.0)
    ref = ctx.get("ref")
    dtw_cfg = ctx.get("dtw_cfg", L.SoftDtwConfig())
    fcfg = ctx.get("fcfg", L.SparsityFreqConfig())
    weights = ctx.get("weights", L.LossWeights())
    ref_sig = SampledSignal(ref, fs) if ref is not None else None

    if loss_id == "sparsity_time":
        return L.sparsity_time, _kinks_abs
    if loss_id == "sparsity_sd":
        return L.sparsity_sd, _kinks_sd
    if loss_id == "sparsity_freq":
        peak = L.spectral_peak_freq(x0, fs, fcfg.band)
        return (lambda v: L.sparsity_freq(SampledSignal(v, fs), fcfg, peak_hz=peak)), None
    if loss_id.startswith("variance_"):
        domain = loss_id.split("_", 1)[1]
        kinks = {"time": _kinks_abs, "sd": _kinks_sd}.get(domain)
        return (lambda v: L.variance_loss_domain(SampledSignal(v, fs), ref_sig, domain,
                                                 fcfg.wavelet_levels)), kinks
    if loss_id == "soft_dtw":
        return (lambda v: L.soft_dtw_value_and_grad(v, ref, dtw_cfg)), None
    if loss_id == "soft_dtw_divergence":
        return (lambda v: L.soft_dtw_divergence(v, ref, dtw_cfg)), None
    if loss_id == "total":
        peak = L.spectral_peak_freq(x0, fs, fcfg.band)

        def fn(v):
            br = L.total_loss(SampledSignal(v, fs), ref_sig, weights, dtw_cfg, fcfg, peak_hz=peak)
            return br.total, br.grad

        def kinks(v, tol):
            return _kinks_abs(v, tol) | _kinks_sd(v, tol)

        return fn, kinks
    raise ValueError(f"unknown loss id {loss_id!r}; expected one of {LOSS_IDS}")


def finite_diff_check(loss_id: str, x, context: dict | None = None, eps: float = 1e-5,
                      grad_floor: float = 1e-8, return_details: bool = False):
    """Max relative error between the analytic gradient and central differences.

    ``context`` may hold ``ref`` (reference samples), ``fs``, ``dtw_cfg``,
    ``fcfg`` and ``weights``.  Coordinates with ``|grad| <= grad_floor`` or
    whose perturbation crosses an absolute-value kink are skipped.  The
    spectral peak is located once at ``x`` and held fixed for every
    perturbed evaluation.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    ctx = dict(context or {})
    x0 = np.array(x.samples if isinstance(x, SampledSignal) else x, dtype=np.float64)
    if isinstance(x, SampledSignal):
        ctx.setdefault("fs", x.fs)
    fn, kink_fn = _loss_fn(loss_id, ctx, x0)
    _, grad = fn(x0)
    fd = np.empty_like(x0)
    xp = x0.copy()
    for n in range(x0.size):
        xp[n] = x0[n] + eps
        f_plus = fn(xp)[0]
        xp[n] = x0[n] - eps
        f_minus = fn(xp)[0]
        xp[n] = x0[n]
        fd[n] = (f_plus - f_minus) / (2 * eps)
    keep = np.abs(grad) > grad_floor
    if kink_fn is not None:
        keep &= ~kink_fn(x0, max(1e-6, 2 * eps))
    rel = np.abs(fd[keep] - grad[keep]) / np.abs(grad[keep])
    err = float(rel.max()) if rel.size else 0.0
    if return_details:
        return err, grad, fd, keep
    return err
