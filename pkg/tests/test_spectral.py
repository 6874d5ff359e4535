import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppgloss.errors import BadBandError, BadLengthError, MalformedError, NoPeakError, TooShortError
from ppgloss.signals import SampledSignal
from ppgloss.spectral import (
    WaveletDecomposition,
    dwt_db4,
    idwt_db4,
    magnitude_spectrum,
    spectral_peak_hr,
    wavelet_mass,
)
from ppgloss.synth import SynthConfig, synth_ppg_meta

# Daubechies 8-tap scaling filter as tabulated in common wavelet libraries
# (rec_lo of db4), used as an independent reference for the coefficients.
PUBLISHED_DB4 = np.array([
    0.23037781330885523, 0.7148465705525415, 0.6308807679295904, -0.02798376941698385,
    -0.18703481171888114, 0.030841381835986965, 0.032883011666982945, -0.010597401784997278,
])


def tone(freq, fs, n, amp=1.0, phase=0.0):
    return amp * np.cos(2 * np.pi * freq * np.arange(n) / fs + phase)


class TestMagnitudeSpectrum:
    def test_bin_aligned_tone(self):
        sp = magnitude_spectrum(SampledSignal(tone(1.0, 30, 300), 30), (0.5, 5))
        assert sp.peak_frequency() == 1.0
        assert np.all(np.diff(sp.freqs) > 0)
        assert sp.freqs[0] >= 0.5 and sp.freqs[-1] <= 5

    def test_zero(self):
        sp = magnitude_spectrum(SampledSignal(np.zeros(64), 30))
        assert np.all(sp.mags == 0)

    def test_two_tone_ratio(self):
        x = tone(1.2, 30, 300) + tone(2.4, 30, 300, 0.5, 0.3)
        sp = magnitude_spectrum(SampledSignal(x, 30))
        a = sp.mags[np.argmin(np.abs(sp.freqs - 1.2))]
        b = sp.mags[np.argmin(np.abs(sp.freqs - 2.4))]
        # closed form for bin-aligned tones: |X_k| = amp * N / 2
        assert abs(a - 150) < 1e-9 and abs(b - 75) < 1e-9
        assert abs(a / b - 2) < 1e-9

    def test_matches_direct_dft(self, rng):
        x = rng.normal(size=40)
        sp = magnitude_spectrum(SampledSignal(x, 10), (0, 5))
        n = np.arange(40)
        direct = [abs(np.sum(x * np.exp(-2j * np.pi * k * n / 40))) for k in range(21)]
        np.testing.assert_allclose(sp.mags, direct, atol=1e-10)

    @pytest.mark.parametrize("band", [(3, 2), (-1, 2), (0, 20)])
    def test_bad_band(self, band):
        with pytest.raises(BadBandError):
            magnitude_spectrum(SampledSignal(np.zeros(64), 30), band)

    def test_too_short(self):
        with pytest.raises(TooShortError):
            magnitude_spectrum(SampledSignal(np.zeros(7), 30))

    @given(st.integers(0, 2**32 - 1))
    def test_negation_symmetry(self, seed):
        x = np.random.default_rng(seed).normal(size=64)
        a = magnitude_spectrum(SampledSignal(x, 30)).mags
        b = magnitude_spectrum(SampledSignal(-x, 30)).mags
        np.testing.assert_array_equal(a, b)

    def test_csv(self):
        text = magnitude_spectrum(SampledSignal(tone(1, 30, 300), 30)).to_csv()
        assert text.splitlines()[0] == "freq_hz,magnitude"


class TestDwt:
    def test_filter_matches_published(self):
        from ppgloss.spectral import DB4_HI, DB4_LO
        np.testing.assert_allclose(DB4_LO, PUBLISHED_DB4, atol=1e-11)
        # orthonormality of the filter pair
        assert abs(DB4_LO @ DB4_LO - 1) < 1e-14
        assert abs(DB4_LO.sum() - np.sqrt(2)) < 1e-14
        for shift in (2, 4, 6):
            assert abs(DB4_LO[shift:] @ DB4_LO[:-shift]) < 1e-14
        # four vanishing moments of the wavelet filter
        t = np.arange(8)
        for p in range(4):
            assert abs(np.sum(DB4_HI * t ** p)) < 1e-9

    def test_constant_details_vanish(self):
        d = dwt_db4(SampledSignal(np.full(32, 3.7), 1), 1)
        assert np.max(np.abs(d.details[0])) < 1e-10

    def test_impulse_gives_taps(self):
        p = 9
        x = np.zeros(16)
        x[p] = 1.0
        d = dwt_db4(SampledSignal(x, 1), 1)
        # hand convolution: coefficient k sees x[(2k + t) % 16] with tap t
        hi = np.array([(-1) ** t * PUBLISHED_DB4[7 - t] for t in range(8)])
        exp_a, exp_d = np.zeros(8), np.zeros(8)
        for k in range(8):
            t = (p - 2 * k) % 16
            if t < 8:
                exp_a[k], exp_d[k] = PUBLISHED_DB4[t], hi[t]
        np.testing.assert_allclose(d.approx, exp_a, atol=1e-11)
        np.testing.assert_allclose(d.details[0], exp_d, atol=1e-11)

    @pytest.mark.parametrize("n", [64, 128, 256])
    @pytest.mark.parametrize("levels", [1, 2, 3, 4])
    def test_parseval_and_roundtrip(self, rng, n, levels):
        x = rng.normal(size=n)
        d = dwt_db4(SampledSignal(x, 32), levels)
        assert d.coefficient_count() == n
        energy = np.sum(d.approx ** 2) + sum(np.sum(c ** 2) for c in d.details)
        assert abs(energy - np.sum(x ** 2)) < 1e-10 * max(1, np.sum(x ** 2) / n)
        back = idwt_db4(d).samples
        assert np.max(np.abs(back - x)) < 1e-10

    def test_lengths(self):
        d = dwt_db4(SampledSignal(np.zeros(64), 1), 3)
        assert [len(c) for c in d.details] == [32, 16, 8]
        assert len(d.approx) == 8

    def test_bad_length(self):
        with pytest.raises(BadLengthError):
            dwt_db4(SampledSignal(np.zeros(100), 1), 3)
        with pytest.raises(BadLengthError):
            dwt_db4(SampledSignal(np.zeros(64), 1), 0)

    def test_zero_coefficients(self):
        d = WaveletDecomposition(2, np.zeros(4), [np.zeros(8), np.zeros(4)], 16, 8.0)
        np.testing.assert_array_equal(idwt_db4(d).samples, np.zeros(16))

    def test_malformed(self):
        with pytest.raises(MalformedError):
            idwt_db4(WaveletDecomposition(2, np.zeros(4), [np.zeros(8)], 16, 8.0))
        with pytest.raises(MalformedError):
            idwt_db4(WaveletDecomposition(2, np.zeros(5), [np.zeros(8), np.zeros(4)], 16, 8.0))
        with pytest.raises(MalformedError):
            idwt_db4(WaveletDecomposition(2, np.zeros(4), [np.zeros(7), np.zeros(4)], 16, 8.0))

    def test_dict_roundtrip(self, rng):
        d = dwt_db4(SampledSignal(rng.normal(size=32), 4), 2)
        back = WaveletDecomposition.from_dict(d.to_dict())
        np.testing.assert_allclose(idwt_db4(back).samples, idwt_db4(d).samples, atol=1e-10)

    def test_drop_finest_band(self):
        fs, n = 32, 256
        x = tone(1, fs, n) + tone(10, fs, n)
        d = dwt_db4(SampledSignal(x, fs), 1)
        y = idwt_db4(WaveletDecomposition(1, d.approx, [np.zeros(n // 2)], n, fs)).samples

        def energy_at(v, f):
            return np.abs(np.fft.rfft(v))[int(f * n / fs)] ** 2

        assert energy_at(y, 10) < 0.5 * energy_at(x, 10)
        assert energy_at(y, 1) > 0.9 * energy_at(x, 1)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 4), st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_roundtrip_property(self, levels, blocks, seed):
        n = blocks * 2 ** levels
        if n < 8:
            n = 8 * 2 ** levels
        x = np.random.default_rng(seed).normal(size=n)
        back = idwt_db4(dwt_db4(SampledSignal(x, 1), levels)).samples
        assert np.max(np.abs(back - x)) < 1e-10


class TestWaveletMass:
    def test_zero(self):
        m = wavelet_mass(SampledSignal(np.zeros(64), 32), 4)
        assert np.all(m.mags == 0)

    def test_tone_at_band_edge(self):
        # 1 Hz sits on the edge between the approximation band [0, 1] and
        # the coarsest detail band [1, 2]; together they hold the tone
        m = wavelet_mass(SampledSignal(tone(1, 32, 256), 32), 4)
        share = m.mags / m.mags.sum()
        assert share[0] + share[1] > 0.8

    def test_tone_at_band_center(self):
        m = wavelet_mass(SampledSignal(tone(1.5, 32, 256), 32), 4)
        share = m.mags / m.mags.sum()
        assert share[1] > 0.8
        assert m.freqs[1] == 1.5

    def test_white_noise_spread(self):
        shares = []
        for seed in range(100):
            m = wavelet_mass(SampledSignal(np.random.default_rng(seed).normal(size=256), 32), 4)
            shares.append(m.mags / m.mags.sum())
        assert np.mean(shares, axis=0).max() < 0.6

    def test_mass_matches_parseval(self, rng):
        x = rng.normal(size=128)
        m = wavelet_mass(SampledSignal(x, 32), 3)
        assert abs(m.mags.sum() - np.sum(x ** 2)) < 1e-10


class TestSpectralPeakHr:
    def test_one_hz(self):
        assert abs(spectral_peak_hr(SampledSignal(tone(1.0, 30, 300), 30)) - 60) < 0.1

    def test_zero(self):
        with pytest.raises(NoPeakError):
            spectral_peak_hr(SampledSignal(np.zeros(300), 30))

    def test_too_short(self):
        with pytest.raises(TooShortError):
            spectral_peak_hr(SampledSignal(tone(1, 30, 120), 30))

    def test_synthetic_72(self):
        sig, meta = synth_ppg_meta(SynthConfig(hr_bpm=72, fs=50, duration_s=10))
        # oracle: peak count over the duration spanned by consecutive peaks
        t = meta.systolic_times_s
        oracle = 60 * (t.size - 1) / (t[-1] - t[0])
        assert abs(spectral_peak_hr(sig) - oracle) <= 1

    def test_off_bin_tone_interpolated(self):
        # 1.05 Hz lies between bins at 0.1 Hz spacing; interpolation beats bin rounding
        est = spectral_peak_hr(SampledSignal(tone(1.05, 30, 300), 30))
        assert abs(est - 63) < abs(60 - 63)

    @given(st.floats(1e-3, 1e3), st.integers(0, 2**32 - 1))
    def test_scale_invariant(self, scale, seed):
        x = tone(1.3, 30, 300) + 0.3 * np.random.default_rng(seed).normal(size=300)
        assert spectral_peak_hr(SampledSignal(scale * x, 30)) == pytest.approx(
            spectral_peak_hr(SampledSignal(x, 30)), abs=1e-9)
