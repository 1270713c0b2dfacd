#!/usr/bin/env python3
"""Time the numba kernels against their pure-numpy fallbacks.

Run:  python benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]

The numba column includes a warm-up call so compilation time is not
measured.  Set INFORATE_NUMBA=0 to check which backend the package
itself would pick at import time (reported in the header).
"""

import argparse
import time

import numpy as np

from inforate import _kernels
from inforate._rng import make_rng


def best_of(fn, repeat, *args):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = make_rng(0, 0)
    n = args.n
    z = rng.normal(0.0, 1.0, n)
    steps = rng.uniform(-0.3, 0.3, n)
    blocks = rng.integers(0, 2, n).astype(np.float64)
    offsets = rng.uniform(0.0, 1.0, n)
    ix = rng.integers(0, 100, n)
    iy = rng.integers(0, 100, n)

    cases = [
        ("ar1_path", (0.1, 0.8, z), _kernels.ar1_path_numpy, _kernels.ar1_path_numba),
        (
            "cyclic_path",
            (0.1, steps, 1.0),
            _kernels.cyclic_path_numpy,
            _kernels.cyclic_path_numba,
        ),
        (
            "alternating_blocks_path",
            (0.5, blocks, offsets),
            _kernels.alternating_blocks_path_numpy,
            _kernels.alternating_blocks_path_numba,
        ),
        (
            "pair_counts",
            (ix, iy, 100),
            _kernels.pair_counts_numpy,
            _kernels.pair_counts_numba,
        ),
    ]

    print(f"n = {n}, repeat = {args.repeat}, package backend = {_kernels.backend()}")
    print(f"{'kernel':<26}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, inputs, np_fn, nb_fn in cases:
        t_np = best_of(np_fn, args.repeat, *inputs)
        nb_fn(*inputs)  # warm-up / JIT
        t_nb = best_of(nb_fn, args.repeat, *inputs)
        print(
            f"{name:<26}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}"
            f"{t_np / t_nb:>10.2f}x"
        )


if __name__ == "__main__":
    main()
