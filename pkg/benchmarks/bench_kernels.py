#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

The pure fallback packs coefficients into big integers (Kronecker
substitution) and leans on CPython's bignum multiplication; the compiled
kernel is a schoolbook convolution in C.  Run after `pip install -e .`:

    python3 benchmarks/bench_kernels.py
"""

import random
import time

from tiltlab import _kernels_py

try:
    from tiltlab import _kernels as _compiled
except ImportError:
    _compiled = None


def bench(fn, a, b, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(a, b, *args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = random.Random(0)
    print(f"compiled kernels available: {_compiled is not None}")
    header = f"{'kernel':<18} {'size':>6} {'python':>12} {'cython':>12} {'ratio':>7}"
    print(header)
    print("-" * len(header))
    for e in (125, 625, 3125):
        p, nd = 5, 6
        pmod = p**nd
        a = [rng.randrange(pmod) for _ in range(e)]
        b = [rng.randrange(pmod) for _ in range(e)]
        t_py = bench(_kernels_py.eisenstein_mul, a, b, (e, p, pmod), 5)
        if _compiled is not None:
            t_cy = bench(_compiled.eisenstein_mul, a, b, (e, p, pmod), 5)
            ratio = f"{t_py / t_cy:6.2f}x"
            cy = f"{t_cy * 1e3:9.3f} ms"
        else:
            cy, ratio = "-", "-"
        print(f"{'eisenstein_mul':<18} {e:>6} {t_py * 1e3:9.3f} ms {cy:>12} {ratio:>7}")
    for window in (150, 750, 3750):
        p = 5
        a = [rng.randrange(p) for _ in range(window)]
        b = [rng.randrange(p) for _ in range(window)]
        t_py = bench(_kernels_py.window_mul, a, b, (window, p), 5)
        if _compiled is not None:
            t_cy = bench(_compiled.window_mul, a, b, (window, p), 5)
            ratio = f"{t_py / t_cy:6.2f}x"
            cy = f"{t_cy * 1e3:9.3f} ms"
        else:
            cy, ratio = "-", "-"
        print(f"{'window_mul':<18} {window:>6} {t_py * 1e3:9.3f} ms {cy:>12} {ratio:>7}")

    # One end-to-end figure: the monoidal map on a depth-4 tower.
    import os

    os.environ.pop("TILTLAB_FORCE_PY", None)
    from tiltlab.monoidal import multiplicativity_trial
    from tiltlab.towers import TowerSpec, build_tower

    handle = build_tower(TowerSpec(prime=5, n_digits=6, depth=4))
    t0 = time.perf_counter()
    multiplicativity_trial(handle, 0, 4, pairs=100, seed=0)
    print(
        f"\nsharp multiplicativity, 100 pairs at depth 4 "
        f"({'cython' if _compiled else 'python'} backend): "
        f"{time.perf_counter() - t0:.2f} s"
    )


if __name__ == "__main__":
    main()
