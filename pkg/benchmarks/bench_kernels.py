"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints the best-of-``repeat`` wall time per kernel and backend, the speedup,
and the largest absolute difference between the two outputs.
"""

import argparse
import timeit

import numpy as np

from powermix._kernels import get_backend
from powermix.grid import GridSpec
from powermix import mixing


def cases():
    s, _ = GridSpec().build(1.0)
    u = np.log1p(s)
    comp = -np.expm1(-s) / (1.0 + 0.1 * s)
    t, w = mixing.uniform().nodes()
    xq = np.random.default_rng(0).uniform(0.0, u[-1], 200_000)
    za = np.linspace(1.5, 6.0, 20_000)

    def slopes(k):
        return k.monotone_slopes(u, comp)

    def hermite(k):
        return k.hermite_eval(u, comp, slopes(k), xq)

    def sigma(k):
        return k.sigma_sum(u, comp, slopes(k), 1.0, s, t, w, 1.0, 2.0, False)[0]

    def zeta(k):
        return k.zeta_partial(za, 200, 2)

    return {"monotone_slopes": slopes, "hermite_eval (2e5 pts)": hermite,
            "sigma_sum (513 x 64)": sigma, "zeta_partial (2e4 x 200)": zeta}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    py = get_backend("python")
    try:
        cy = get_backend("cython")
    except ImportError:
        print("compiled backend not built; only the numpy backend is available")
        cy = None
    print(f"{'kernel':28s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, fn in cases().items():
        tp = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat)) * 1e3
        if cy is None:
            print(f"{name:28s} {tp:11.3f}")
            continue
        tc = min(timeit.repeat(lambda: fn(cy), number=1, repeat=args.repeat)) * 1e3
        diff = float(np.max(np.abs(np.asarray(fn(py)) - np.asarray(fn(cy)))))
        print(f"{name:28s} {tp:11.3f} {tc:12.3f} {tp / tc:8.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
