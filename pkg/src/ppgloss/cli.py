"""``ppgloss`` command line.

Exit status is 0 on success, 2 for usage errors (bad flags, missing input
files, missing output directories) and 1 for computation errors.  Outputs
are written atomically, so a failed command leaves no partial files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import losses as L
from .errors import PPGLossError
from .export import EvalBatch, atomic_write, emit_plot_data
from .gradcheck import LOSS_IDS, finite_diff_check
from .metrics import HrSeriesPair, frechet, hr_error_stats, hr_series, pearson, rmse
from .morphology import detect_sdppg_waves, smoothed_sdppg
from .reconstruct import METHODS, RECONSTRUCT_DTW_GAMMA, OptimConfig, reconstruct
from .signals import SampledSignal, format_signal_csv, normalize, read_signal, round_sig, signal_to_dict
from .spectral import HR_BAND, dwt_db4, magnitude_spectrum, spectral_peak_hr, wavelet_mass
from .synth import NoiseConfig, SynthConfig, add_noise, synth_ppg_meta

GRADCHECK_PASS = 1e-3


class UsageError(Exception):
    pass


def _band(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI in Hz, got {text!r}") from None
    return lo, hi


def _positive(kind):
    def parse(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return parse


def _round_tree(obj):
    if isinstance(obj, dict):
        return {k: _round_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_tree(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return round_sig(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _dump_json(obj) -> str:
    return json.dumps(_round_tree(obj), indent=2) + "\n"


def _signal_text(signal: SampledSignal, path: Path) -> str:
    if path.suffix.lower() == ".csv":
        return format_signal_csv(signal)
    return _dump_json(signal_to_dict(signal))


# ------------------------------------------------------------------ parser

def _add_weights(p):
    p.add_argument("--alpha", type=float, default=1.5)
    p.add_argument("--beta", type=float, default=0.8)
    p.add_argument("--gamma-sd", type=float, default=1.2)
    p.add_argument("--delta-f", type=float, default=0.2)
    p.add_argument("--band", type=_band, default=HR_BAND)
    p.add_argument("--levels", type=int, default=4)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ppgloss", description="Multi-domain PPG losses and analysis tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic PPG")
    p.add_argument("--hr", type=float, required=True)
    p.add_argument("--fs", type=_positive(float), required=True)
    p.add_argument("--dur", type=_positive(float), required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--diastolic-amp", type=float, default=0.4)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--baseline-amp", type=float, default=0.0)
    p.add_argument("-o", "--output", type=Path, required=True)

    p = sub.add_parser("sdppg", help="PPG and SDPPG fiducial points as CSV")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--smooth-win", type=_positive(int), default=5)
    p.add_argument("-o", "--output", type=Path, required=True)

    p = sub.add_parser("wavelet", help="DB4 decomposition and subband energies as JSON")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--pad", action="store_true", help="zero-pad to a multiple of 2**levels")
    p.add_argument("-o", "--output", type=Path, required=True)

    p = sub.add_parser("hr", help="spectral-peak heart rate")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--band", type=_band, default=HR_BAND)
    p.add_argument("-o", "--output", type=Path, help="optional in-band spectrum CSV")

    p = sub.add_parser("loss", help="eight-term loss report")
    p.add_argument("--pred", type=Path, required=True)
    p.add_argument("--ref", type=Path, required=True)
    _add_weights(p)
    p.add_argument("--gamma-dtw", type=float, default=1.0)
    p.add_argument("-o", "--output", type=Path, required=True)

    p = sub.add_parser("gradcheck", help="finite-difference gradient check on random signals")
    p.add_argument("--loss", choices=LOSS_IDS, required=True)
    p.add_argument("--n", type=_positive(int), default=64)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--fs", type=_positive(float), default=30.0)
    p.add_argument("--gamma-dtw", type=float, default=1.0)
    p.add_argument("--eps", type=_positive(float), default=1e-5)

    p = sub.add_parser("reconstruct", help="gradient-descent reconstruction against a reference")
    p.add_argument("--target", type=Path, help="reference signal; synthesized from --hr/--fs/--dur if omitted")
    p.add_argument("--init", type=Path, help="starting signal; target plus --noise-sigma noise if omitted")
    p.add_argument("--hr", type=float, default=72.0)
    p.add_argument("--fs", type=_positive(float), default=50.0)
    p.add_argument("--dur", type=_positive(float), default=10.0)
    p.add_argument("--noise-sigma", type=float, default=0.5)
    p.add_argument("--seed", type=int, required=True)
    _add_weights(p)
    p.add_argument("--gamma-dtw", type=float, default=RECONSTRUCT_DTW_GAMMA)
    p.add_argument("--iters", type=_positive(int), default=2000)
    p.add_argument("--step", type=_positive(float), default=0.05)
    p.add_argument("--method", choices=METHODS, default="adaptive_moments")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--log-every", type=_positive(int), default=10)
    p.add_argument("-o", "--output", type=Path, required=True, help="final signal")
    p.add_argument("--trace", type=Path, help="loss-trace CSV")
    p.add_argument("--metrics", type=Path, help="final metrics JSON")
    p.add_argument("--overlay", type=Path, help="reconstruction/target overlay CSV")

    p = sub.add_parser("eval", help="waveform and HR metrics on z-scored inputs")
    p.add_argument("--pred", type=Path)
    p.add_argument("--ref", type=Path)
    p.add_argument("--pair", nargs=2, action="append", type=Path, metavar=("PRED", "REF"),
                   help="add a pair to a batch (repeatable)")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--batch-csv", type=Path, help="per-pair rows plus mu/sigma rows")
    return parser


def _validate_paths(args):
    inputs = [getattr(args, n) for n in ("input", "pred", "ref", "target", "init") if getattr(args, n, None)]
    for pair in getattr(args, "pair", None) or []:
        inputs += list(pair)
    for path in inputs:
        if not path.is_file():
            raise UsageError(f"input file not found: {path}")
    outputs = [getattr(args, n) for n in ("output", "trace", "metrics", "overlay", "batch_csv")
               if getattr(args, n, None)]
    for path in outputs:
        if not path.parent.resolve().is_dir():
            raise UsageError(f"output directory does not exist: {path.parent}")
    if args.command == "eval":
        single = args.pred is not None or args.ref is not None
        if single and (args.pred is None or args.ref is None):
            raise UsageError("eval needs both --pred and --ref")
        if single == bool(args.pair):
            raise UsageError("eval takes either --pred/--ref or one or more --pair")


# ------------------------------------------------------------------ commands

def _cmd_synth(args):
    cfg = SynthConfig(hr_bpm=args.hr, fs=args.fs, duration_s=args.dur,
                      diastolic_amp=args.diastolic_amp, seed=args.seed)
    signal, meta = synth_ppg_meta(cfg)
    signal = add_noise(signal, NoiseConfig(white_sigma=args.noise_sigma, baseline_amp=args.baseline_amp,
                                           seed=args.seed))
    sidecar = args.output.with_name(args.output.stem + ".meta.json")
    meta_obj = dict(meta.to_dict(), fs=args.fs, duration_s=args.dur, seed=args.seed,
                    noise_sigma=args.noise_sigma, baseline_amp=args.baseline_amp)
    atomic_write(args.output, _signal_text(signal, args.output))
    atomic_write(sidecar, _dump_json(meta_obj))


def _cmd_sdppg(args):
    signal = read_signal(args.input)
    fid = detect_sdppg_waves(signal, smooth_win=args.smooth_win)
    atomic_write(args.output, fid.to_csv(signal, smoothed_sdppg(signal, args.smooth_win)))


def _cmd_wavelet(args):
    signal = read_signal(args.input)
    block = 2 ** max(args.levels, 0)
    if args.pad and len(signal) % block:
        signal = signal.with_samples(np.pad(signal.samples, (0, block - len(signal) % block)))
    decomp = dwt_db4(signal, args.levels)
    mass = wavelet_mass(signal, args.levels)
    obj = decomp.to_dict()
    obj["subband_energy"] = {"center_hz": list(mass.freqs), "energy": list(mass.mags)}
    atomic_write(args.output, _dump_json(obj))


def _cmd_hr(args):
    signal = read_signal(args.input)
    hr = spectral_peak_hr(signal, args.band)
    if args.output:
        atomic_write(args.output, magnitude_spectrum(signal, args.band).to_csv())
    print(f"hr_bpm {hr:.12g}")


def _loss_configs(args):
    weights = L.LossWeights(alpha=args.alpha, beta=args.beta, gamma_sd=args.gamma_sd)
    fcfg = L.SparsityFreqConfig(band=args.band, delta_f=args.delta_f, wavelet_levels=args.levels)
    return weights, L.SoftDtwConfig(gamma=args.gamma_dtw), fcfg


def _cmd_loss(args):
    pred, ref = read_signal(args.pred), read_signal(args.ref)
    weights, dtw_cfg, fcfg = _loss_configs(args)
    br = L.total_loss(pred, ref, weights, dtw_cfg, fcfg)
    atomic_write(args.output, _dump_json(br.to_report()))


def _cmd_gradcheck(args):
    rng = np.random.default_rng(args.seed)
    x = rng.normal(size=args.n)
    ref = rng.normal(size=args.n)
    ctx = {"ref": ref, "fs": args.fs, "dtw_cfg": L.SoftDtwConfig(gamma=args.gamma_dtw)}
    err = finite_diff_check(args.loss, x, ctx, eps=args.eps)
    print(f"max_rel_error {err:.12g}")
    return 0 if err < GRADCHECK_PASS else 1


def _cmd_reconstruct(args):
    if args.target:
        target = read_signal(args.target)
    else:
        target = synth_ppg_meta(SynthConfig(hr_bpm=args.hr, fs=args.fs, duration_s=args.dur, seed=args.seed))[0]
    if args.init:
        init = read_signal(args.init)
    else:
        init = add_noise(target, NoiseConfig(white_sigma=args.noise_sigma, seed=args.seed))
    weights, dtw_cfg, fcfg = _loss_configs(args)
    ocfg = OptimConfig(max_iters=args.iters, step=args.step, method=args.method, tol=args.tol,
                       seed=args.seed, log_every=args.log_every)
    result = reconstruct(target, init, weights, ocfg, dtw_cfg, fcfg)
    atomic_write(args.output, _signal_text(result.final_signal, args.output))
    if args.trace:
        emit_plot_data(result, args.trace)
    if args.metrics:
        atomic_write(args.metrics, _dump_json(dict(result.final_metrics, iters_run=result.iters_run,
                                                   best_iter=result.best_iter)))
    if args.overlay:
        emit_plot_data({"reconstruction": result.final_signal, "target": target, "init": init}, args.overlay)


def _hr_block(pred, ref):
    try:
        pair = HrSeriesPair(hr_series(pred), hr_series(ref))
    except PPGLossError:
        return {"mae": None, "rmse": None, "r": None}
    delta = pair.hr_pred - pair.hr_true
    out = {"mae": float(np.mean(np.abs(delta))), "rmse": float(np.sqrt(np.mean(delta ** 2))), "r": None}
    if pair.hr_pred.size >= 2:
        try:
            out["r"] = hr_error_stats(pair)["r"]
        except PPGLossError:
            pass
    return out


def eval_pair(pred: SampledSignal, ref: SampledSignal) -> dict:
    """Metrics of the eval report for one pair; inputs are z-scored first."""
    zp, zr = normalize(pred), normalize(ref)
    return {"pearson": pearson(zp, zr), "frechet": frechet(zp, zr), "rmse": rmse(zp, zr),
            "hr": _hr_block(pred, ref)}


def _cmd_eval(args):
    if args.pair is None:
        report = eval_pair(read_signal(args.pred), read_signal(args.ref))
        batch = EvalBatch()
        batch.add(args.pred.name, report)
    else:
        batch = EvalBatch()
        pairs = []
        for pred_path, ref_path in sorted(args.pair, key=lambda pr: (str(pr[0]), str(pr[1]))):
            rep = eval_pair(read_signal(pred_path), read_signal(ref_path))
            batch.add(pred_path.name, rep)
            pairs.append(dict(rep, pred=str(pred_path), ref=str(ref_path)))
        mom = batch.moments()
        report = {"pairs": pairs, "mu": {k: v[0] for k, v in mom.items()},
                  "sigma": {k: v[1] for k, v in mom.items()}}
    atomic_write(args.output, _dump_json(report))
    if args.batch_csv:
        emit_plot_data(batch, args.batch_csv)


COMMANDS = {
    "synth": _cmd_synth,
    "sdppg": _cmd_sdppg,
    "wavelet": _cmd_wavelet,
    "hr": _cmd_hr,
    "loss": _cmd_loss,
    "gradcheck": _cmd_gradcheck,
    "reconstruct": _cmd_reconstruct,
    "eval": _cmd_eval,
}


def run(argv=None) -> int:
    """Parse ``argv`` and execute one subcommand; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _validate_paths(args)
    except UsageError as exc:
        print(f"ppgloss {args.command}: error: {exc}", file=sys.stderr)
        return 2
    try:
        status = COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:  # PPGLossError and JSONDecodeError are ValueErrors
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"ppgloss {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0 if status is None else status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
