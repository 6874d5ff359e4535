"""Multi-domain PPG loss suite: soft-DTW, sparsity and CDF variance losses in
the time, wavelet and second-derivative domains, plus the signal tooling
(synthesis, fiducials, metrics, reconstruction) needed to exercise them."""

from ._backend import active_backend, available_backends, use_backend
from .errors import *  # noqa: F401,F403
from .kernels import AttentionKernelInput, scaled_cosine_attention
from .losses import (
    TERM_NAMES,
    LossBreakdown,
    LossWeights,
    MassDistribution,
    SoftDtwConfig,
    SparsityFreqConfig,
    domain_mass,
    expected_alignment,
    soft_dtw,
    soft_dtw_divergence,
    soft_dtw_grad,
    soft_dtw_value_and_grad,
    sparsity_freq,
    sparsity_sd,
    sparsity_time,
    total_loss,
    variance_loss,
    variance_loss_domain,
)
from .metrics import HrSeriesPair, frechet, hr_error_stats, hr_series, pearson, rmse
from .morphology import BeatFiducials, FiducialSet, detect_fiducials, detect_onsets, detect_sdppg_waves
from .reconstruct import OptimConfig, ReconstructionResult, reconstruct
from .signals import (
    PatchSet,
    SampledSignal,
    normalize,
    read_signal,
    second_difference,
    second_difference_adjoint,
    segment_patches,
)
from .spectral import (
    Spectrum,
    WaveletDecomposition,
    dwt_db4,
    idwt_db4,
    magnitude_spectrum,
    spectral_peak_hr,
    wavelet_mass,
)
from .synth import NoiseConfig, SynthConfig, SynthMeta, add_noise, synth_ppg, synth_ppg_meta

__version__ = "0.1.0"
