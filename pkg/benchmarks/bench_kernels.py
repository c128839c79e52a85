"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat 5]

The first numba call of each kernel is a warm-up and is not timed.  Bands are
random, so sweeps may overflow; only the timing is of interest here.
"""
import argparse
import time

import numpy as np

from pentaspec import kernels
from pentaspec._accel import HAVE_NUMBA


def cases(rng):
    n = 20000
    C, A, B = rng.uniform(0.5, 1.5, n), rng.uniform(-1, 1, n), rng.uniform(0.5, 1.5, n)
    lams = rng.uniform(3.2, 5, 64) + 1j * rng.uniform(-1, 1, 64)
    alphas = np.full(64, 0.25 + 0j)
    d, e = rng.standard_normal(2000), rng.standard_normal(2000)
    e[-1] = 0.0
    m = 300
    H = (np.diag(rng.standard_normal(m)) + np.diag(rng.standard_normal(m - 1), 1)
         + np.diag(rng.standard_normal(m - 1), -1)).astype(np.complex128)
    return {
        "forward_sweep (M=10000)": ("forward_sweep", (C, A, B, 0.3 + 0.1j, 0j, 1 + 0j, 10000)),
        "backward_minimal (64 lam, N=10000)": ("backward_minimal", (C, A, B, lams, 10000, 5)),
        "jost_sweep (64 lam, N=10000)": ("jost_sweep", (C, A, B, lams, alphas, 10000)),
        "tridiag_eigvalsh (n=2000)": ("tridiag_eigvalsh", (d, e, 0.0, 60000)),
        "hessenberg_eigvals (n=300)": ("hessenberg_eigvals", (H, 1e-13, 9000)),
    }


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        with np.errstate(all="ignore"):
            t0 = time.perf_counter()
            fn(*args)
            times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ns = ap.parse_args(argv)
    rng = np.random.default_rng(ns.seed)
    print(f"{'kernel':40s} {'numpy [s]':>12s} {'numba [s]':>12s} {'speedup':>9s}")
    for label, (name, args) in cases(rng).items():
        t_np = best_of(getattr(kernels, name + "_np"), args, ns.repeat)
        if HAVE_NUMBA:
            fn = getattr(kernels, name + "_nb")
            best_of(fn, args, 1)
            t_nb = best_of(fn, args, ns.repeat)
            print(f"{label:40s} {t_np:12.5f} {t_nb:12.5f} {t_np / t_nb:9.2f}")
        else:
            print(f"{label:40s} {t_np:12.5f} {'n/a':>12s} {'':>9s}")


if __name__ == "__main__":
    main()
