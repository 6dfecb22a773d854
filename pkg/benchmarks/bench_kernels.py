#!/usr/bin/env python3
"""Benchmark the compiled pair-sum kernels against the NumPy fallback.

Run after an editable install:

    python benchmarks/bench_kernels.py [--repeat 5]

Times the hot operations (general-p energy, energy+gradient, smoothed
absolute value, one-sided masked sum) on representative 1D and 2D grids and
prints a speedup table.  If the extension is not built, only the fallback
column is reported.
"""

import argparse
import time

import numpy as np

from fraclat._backend import fallback

try:
    from fraclat._backend import _core
except ImportError:
    _core = None


def make_case(shape, seed=0):
    rng = np.random.default_rng(seed)
    u = rng.normal(size=shape)
    st = np.abs(rng.normal(size=tuple(2 * n - 1 for n in shape))) + 1e-3
    st[tuple(n - 1 for n in shape)] = 0.0
    st = 0.5 * (st + st[tuple(slice(None, None, -1) for _ in shape)])
    mask = rng.random(shape) < 0.5
    return u, st, mask


def timeit(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    cases = [("1D n=1024", (1024,)), ("2D 48x48", (48, 48)),
             ("2D 96x96", (96, 96))]
    ops = [
        ("energy p=1.5", lambda m, u, st, msk: m.pair_energy(u, st, 1.5)),
        ("energy+grad p=1.5",
         lambda m, u, st, msk: m.pair_energy_grad(u, st, 1.5)),
        ("smoothed |.| eps=1e-3",
         lambda m, u, st, msk: m.smoothed_tv_energy_grad(u, st, 1e-3)),
        ("one-sided masked p=2",
         lambda m, u, st, msk: m.strip_pair_energy(u, st, msk, 2.0)),
    ]

    header = f"{'case':<12} {'operation':<24} {'numpy':>10}"
    if _core is not None:
        header += f" {'compiled':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, shape in cases:
        u, st, mask = make_case(shape)
        for op_name, op in ops:
            t_np = timeit(lambda: op(fallback, u, st, mask), args.repeat)
            line = f"{label:<12} {op_name:<24} {t_np * 1e3:>8.2f}ms"
            if _core is not None:
                t_c = timeit(lambda: op(_core, u, st, mask), args.repeat)
                line += f" {t_c * 1e3:>8.2f}ms {t_np / t_c:>7.1f}x"
                a = op(fallback, u, st, mask)
                b = op(_core, u, st, mask)
                va = a[0] if isinstance(a, tuple) else a
                vb = b[0] if isinstance(b, tuple) else b
                assert abs(va - vb) <= 1e-9 * max(abs(va), 1.0), \
                    f"backend mismatch on {op_name}"
            print(line)


if __name__ == "__main__":
    main()
