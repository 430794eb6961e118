"""Time the numba and pure-numpy kernel backends on identical inputs.

Usage: python benchmarks/bench_kernels.py [--bits N] [--repeat R]
"""
import argparse
import time

import numpy as np

from ddmsim import _kernels
from ddmsim.coding import MEMORY, _SIGNS, conv_encode


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--bits", type=int, default=30_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--map", type=int, nargs=2, default=(256, 128))
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, args.bits)
    tx = 1.0 - 2.0 * conv_encode(np.concatenate([bits, np.zeros(MEMORY, int)]))
    llr = 4.0 * (tx + 0.8 * rng.standard_normal(tx.size))
    power = rng.exponential(size=tuple(args.map))

    cases = {
        "viterbi": (lambda: _kernels.viterbi_numpy(llr, _SIGNS, MEMORY),
                    lambda: _kernels.viterbi_numba(llr, _SIGNS, MEMORY)),
        "local_maxima": (lambda: _kernels.local_maxima_numpy(power),
                         lambda: _kernels.local_maxima_numba(power)),
    }
    if not _kernels.HAVE_NUMBA:
        print("numba not installed; only the numpy path is available")
    print(f"{'kernel':<14}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}  identical")
    for name, (f_np, f_nb) in cases.items():
        t_np, out_np = best_of(f_np, args.repeat)
        if not _kernels.HAVE_NUMBA:
            print(f"{name:<14}{1e3 * t_np:>12.2f}{'-':>12}{'-':>10}")
            continue
        f_nb()  # compile (or load from cache) outside the timing
        t_nb, out_nb = best_of(f_nb, args.repeat)
        same = np.array_equal(out_np, out_nb)
        print(f"{name:<14}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>9.1f}x  {same}")


if __name__ == "__main__":
    main()
