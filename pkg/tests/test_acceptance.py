"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``criterion N: PASS|FAIL`` line (also collected in the
terminal summary) and then asserts it.
"""

import time

import numpy as np
import pytest
from scipy.signal import find_peaks

from oracles import dtw_hard, frechet_brute, pearson_ref, rmse_ref, soft_dtw_enum
from ppgloss import losses as L
from ppgloss.gradcheck import finite_diff_check
from ppgloss.metrics import frechet, pearson, rmse
from ppgloss.morphology import detect_fiducials, detect_sdppg_waves, smoothed_sdppg
from ppgloss.reconstruct import OptimConfig, reconstruct
from ppgloss.signals import SampledSignal
from ppgloss.spectral import dwt_db4, idwt_db4, spectral_peak_hr
from ppgloss.synth import NoiseConfig, SynthConfig, add_noise, synth_ppg, synth_ppg_meta

HR_GRID = (48, 60, 72, 96, 120, 180)


def test_criterion_1_gradients(verdict):
    r = np.random.default_rng(2024)
    t0 = time.perf_counter()
    errors = {}
    for loss_id in ("sparsity_time", "sparsity_sd", "sparsity_freq", "variance_time", "variance_freq",
                    "variance_sd", "soft_dtw", "total"):
        x, ref = r.normal(size=64), r.normal(size=64)
        ctx = {"ref": ref, "fs": 30.0, "dtw_cfg": L.SoftDtwConfig(1.0)}
        errors[loss_id] = finite_diff_check(loss_id, x, ctx, eps=1e-5)
    elapsed = time.perf_counter() - t0
    worst = max(errors, key=errors.get)
    ok = all(e < 1e-3 for e in errors.values()) and errors["soft_dtw"] < 1e-4 and elapsed < 5
    verdict(1, ok, f"worst {worst} {errors[worst]:.2e}, soft_dtw {errors['soft_dtw']:.2e}, {elapsed:.2f} s")
    assert ok


def test_criterion_2_soft_dtw_oracles(verdict):
    t0 = time.perf_counter()
    worst_enum = worst_limit = 0.0
    hard_exact = True
    for seed in range(100):
        r = np.random.default_rng(seed)
        x, y = r.normal(size=r.integers(1, 7)), r.normal(size=r.integers(1, 7))
        for gamma in (0.1, 1.0):
            got = L.soft_dtw(x, y, L.SoftDtwConfig(gamma))[0]
            worst_enum = max(worst_enum, abs(got - soft_dtw_enum(x, y, gamma)))
        hard = L.soft_dtw(x, y, L.SoftDtwConfig(0.0))[0]
        hard_exact &= hard == dtw_hard(list(x), list(y))
        worst_limit = max(worst_limit, abs(L.soft_dtw(x, y, L.SoftDtwConfig(1e-3))[0] - hard))
    elapsed = time.perf_counter() - t0
    ok = worst_enum < 1e-9 and hard_exact and worst_limit < 1e-3 and elapsed < 10
    verdict(2, ok, f"enum err {worst_enum:.1e}, hard exact {hard_exact}, "
                   f"gamma->0 gap {worst_limit:.1e}, {elapsed:.2f} s")
    assert ok


def test_criterion_3_wavelet(verdict):
    r = np.random.default_rng(3)
    t0 = time.perf_counter()
    worst_rt = worst_energy = 0.0
    for n in (64, 128, 256):
        for levels in (1, 2, 3, 4):
            x = r.normal(size=n)
            d = dwt_db4(SampledSignal(x, 32), levels)
            worst_rt = max(worst_rt, np.max(np.abs(idwt_db4(d).samples - x)))
            energy = np.sum(d.approx ** 2) + sum(np.sum(c ** 2) for c in d.details)
            worst_energy = max(worst_energy, abs(energy - np.sum(x ** 2)))
    elapsed = time.perf_counter() - t0
    ok = worst_rt < 1e-10 and worst_energy < 1e-10 and elapsed < 1
    verdict(3, ok, f"round trip {worst_rt:.1e}, Parseval {worst_energy:.1e}, {elapsed:.3f} s")
    assert ok


def test_criterion_4_weighting_identity(verdict):
    w = L.LossWeights(alpha=1.5, beta=0.8, gamma_sd=1.2)
    worst = 0.0
    for seed in range(100):
        r = np.random.default_rng(seed)
        x, y = SampledSignal(r.normal(size=48), 30), SampledSignal(r.normal(size=48), 30)
        br = L.total_loss(x, y, w)
        v = [br.value(n) for n in L.TERM_NAMES]
        expected = 1.5 * (v[0] + v[1] + v[2]) + 0.8 * (v[3] + v[4]) + 1.2 * (v[5] + v[6] + v[7])
        worst = max(worst, abs(br.total - expected))
    ok = worst <= 1e-12
    verdict(4, ok, f"max |total - weighted sum| {worst:.1e} over 100 pairs")
    assert ok


def _peak_count_hr(signal):
    x = signal.samples
    p = find_peaks(x, height=0.95 * x.max(), prominence=0.1)[0]
    return 60.0 * (p.size - 1) / ((p[-1] - p[0]) / signal.fs)


def test_criterion_5_hr(verdict):
    t0 = time.perf_counter()
    worst_clean = worst_noisy = 0.0
    for hr in HR_GRID:
        clean = synth_ppg(SynthConfig(hr_bpm=hr, fs=50, duration_s=10))
        oracle = _peak_count_hr(clean)
        worst_clean = max(worst_clean, abs(spectral_peak_hr(clean) - oracle))
        for seed in range(5):
            noisy = add_noise(clean, NoiseConfig(white_sigma=0.3, seed=seed))
            worst_noisy = max(worst_noisy, abs(spectral_peak_hr(noisy) - oracle))
    elapsed = time.perf_counter() - t0
    ok = worst_clean <= 1 and worst_noisy <= 2 and elapsed < 2
    verdict(5, ok, f"clean err {worst_clean:.3f} bpm, sigma=0.3 err {worst_noisy:.3f} bpm, {elapsed:.2f} s")
    assert ok


@pytest.fixture(scope="module")
def reconstructions():
    target = synth_ppg(SynthConfig(hr_bpm=72, fs=50, duration_s=10))
    init = add_noise(target, NoiseConfig(white_sigma=0.5, seed=7))
    out = {}
    t0 = time.perf_counter()
    for gamma_sd in (1.2, 0.0):
        res = reconstruct(target, init, L.LossWeights(gamma_sd=gamma_sd), OptimConfig(max_iters=300, seed=7))
        out[gamma_sd] = (res, detect_fiducials(res.final_signal).diastolic_rate())
    out["elapsed"] = time.perf_counter() - t0
    return out


def test_criterion_6a_reconstruction_fit(verdict, reconstructions):
    res, _ = reconstructions[1.2]
    m = res.final_metrics
    elapsed = reconstructions["elapsed"]
    ok = m["pearson"] >= 0.9 and m["hr_error_bpm"] <= 1 and elapsed < 60
    verdict("6a", ok, f"Pearson {m['pearson']:.3f}, HR error {m['hr_error_bpm']:.3f} bpm, "
                      f"{res.iters_run} iters, both runs {elapsed:.1f} s")
    assert ok


def test_criterion_6b_diastolic_recovery(verdict, reconstructions):
    _, rate = reconstructions[1.2]
    ok = rate >= 0.8
    verdict("6b", ok, f"diastolic peak found in {rate:.0%} of reconstructed beats (need >= 80%)")
    assert ok


def test_criterion_6c_sd_ablation(verdict, reconstructions):
    _, with_sd = reconstructions[1.2]
    _, without_sd = reconstructions[0.0]
    ok = without_sd < with_sd
    verdict("6c", ok, f"diastolic rate gamma_sd=0 {without_sd:.0%} vs gamma_sd=1.2 {with_sd:.0%} "
                      f"(need strictly lower without SD)")
    assert ok


def test_criterion_7_metric_oracles(verdict):
    frechet_exact = True
    worst = 0.0
    for seed in range(100):
        r = np.random.default_rng(seed)
        x, y = r.normal(size=r.integers(1, 9)), r.normal(size=r.integers(1, 9))
        frechet_exact &= frechet(x, y) == frechet_brute(list(x), list(y))
        a, b = r.normal(size=64), r.normal(size=64)
        worst = max(worst, abs(pearson(a, b) - pearson_ref(list(a), list(b))), abs(rmse(a, b) - rmse_ref(a, b)))
    hand = L.variance_loss(L.MassDistribution([1.0, 0.0]), L.MassDistribution([0.0, 1.0]))
    ok = frechet_exact and worst < 1e-12 and hand == 0.5
    verdict(7, ok, f"Frechet exact {frechet_exact}, Pearson/RMSE err {worst:.1e}, variance hand case {hand}")
    assert ok


def _ordering_ok(fid, sd):
    for b in fid.beats:
        seq = [v for v in (b.a, b.b, b.c, b.d, b.e) if v is not None]
        if any(p >= q for p, q in zip(seq, seq[1:])):
            return False
        if b.a is not None and not (sd[b.a] > 0 and sd[b.b] < 0):
            return False
        if (b.c is None) != (b.d is None):
            return False
    return True


def test_criterion_8_morphology(verdict):
    r = np.random.default_rng(8)
    ordered = 0
    for seed in range(100):
        hr = r.uniform(48, 180)
        cfg = SynthConfig(hr_bpm=hr, fs=100, duration_s=10, diastolic_amp=r.uniform(0, 0.8),
                          systolic_width_s=r.uniform(0.08, 0.16), diastolic_width_s=r.uniform(0.03, 0.08),
                          diastolic_delay_s=min(r.uniform(0.2, 0.35), 0.8 * 60 / hr), seed=seed)
        sig = synth_ppg(cfg)
        ordered += _ordering_ok(detect_sdppg_waves(sig), smoothed_sdppg(sig))
    worst = 0.0
    for hr in np.arange(48, 181, 6):
        sig, meta = synth_ppg_meta(SynthConfig(hr_bpm=float(hr), fs=100, duration_s=10))
        peaks = detect_fiducials(sig).indices("systolic_peak") / 100
        worst = max(worst, np.max(np.min(np.abs(peaks[:, None] - meta.systolic_times_s[None, :]), axis=1)) * 100)
    ok = ordered == 100 and worst <= 3
    verdict(8, ok, f"a-e ordering holds on {ordered}/100 configs, systolic error <= {worst:.2f} samples")
    assert ok
