"""Compare compiled and NumPy kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--sizes 64 128 256 500] [--repeat 5]
"""

import argparse
import time

import numpy as np

from ppgloss import _backend


def _best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(sizes, repeat, gamma=1.0, seed=0):
    rng = np.random.default_rng(seed)
    rows = []
    for n in sizes:
        x, y = rng.normal(size=n), rng.normal(size=n)
        D = np.ascontiguousarray((x[:, None] - y[None, :]) ** 2)
        dist = np.ascontiguousarray(np.abs(x[:, None] - y[None, :]))
        for name in _backend.available_backends():
            _backend.use_backend(name)
            R, W = _backend.soft_dtw_forward_weights(D, gamma)
            timings = {
                "forward": _best_of(lambda: _backend.soft_dtw_forward(D, gamma), repeat),
                "forward_w": _best_of(lambda: _backend.soft_dtw_forward_weights(D, gamma), repeat),
                "backward_w": _best_of(lambda: _backend.soft_dtw_backward_weights(W), repeat),
                "backward_r": _best_of(lambda: _backend.soft_dtw_backward(D, R, gamma), repeat),
                "frechet": _best_of(lambda: _backend.frechet_dp(dist), repeat),
            }
            rows.append((n, name, timings))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256, 500])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--gamma", type=float, default=1.0)
    args = ap.parse_args()

    previous = _backend.active_backend()
    try:
        rows = bench(args.sizes, args.repeat, args.gamma)
    finally:
        _backend.use_backend(previous)
    cols = ("forward", "forward_w", "backward_w", "backward_r", "frechet")
    print(f"{'n':>5} {'backend':>9} " + " ".join(f"{c + ' ms':>13}" for c in cols))
    by_size = {}
    for n, name, t in rows:
        by_size.setdefault(n, {})[name] = t
        print(f"{n:>5} {name:>9} " + " ".join(f"{t[c] * 1e3:>13.3f}" for c in cols))
    if "compiled" in _backend.available_backends():
        print("\nspeedup (python / compiled)")
        for n, t in by_size.items():
            print(f"{n:>5} " + " ".join(f"{t['python'][c] / t['compiled'][c]:>12.1f}x" for c in cols))


if __name__ == "__main__":
    main()
