#!/usr/bin/env python3
"""Benchmark the compiled Sturm-bisection kernel against the numpy fallback.

The tridiagonal Sturm recurrence is the hot inner loop of the 1D eigensolves;
this script times both backends on representative problems and prints a table.

Usage: python3 benchmarks/bench_backends.py
"""

import math
import time

import numpy as np

from cmc_bifurcate._kernels import _py

try:
    from cmc_bifurcate._kernels import _sturm
except ImportError:
    _sturm = None


def _pencil(ns: int):
    """Pinned-pinned Numerov pencil on an interval of length 3 pi / 2."""
    h = 1.5 * math.pi / (ns - 1)
    nf = ns - 2
    da = np.full(nf, 2.0 / h ** 2)
    ea = np.full(nf - 1, -1.0 / h ** 2)
    db = np.full(nf, 10.0 / 12.0)
    eb = np.full(nf - 1, 1.0 / 12.0)
    return da, ea, db, eb


def _time(fn, repeats=5):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rows = []
    for ns, m in ((1001, 5), (2001, 8), (4001, 12)):
        da, ea, db, eb = _pencil(ns)
        xs = np.linspace(0.0, 50.0, 64)
        for label, mod in (("python", _py),) + ((("cython", _sturm),)
                                                if _sturm else ()):
            t_cnt = _time(lambda: mod.count_below_many(da, ea, db, eb, xs))
            t_bis = _time(lambda: mod.bisect_smallest(da, ea, db, eb, m))
            rows.append((ns, m, label, t_cnt, t_bis))

    print(f"{'ns':>6} {'m':>3} {'backend':>8} {'counts(64)':>12} {'bisect(m)':>12}")
    for ns, m, label, t_cnt, t_bis in rows:
        print(f"{ns:>6} {m:>3} {label:>8} {t_cnt * 1e3:>10.2f}ms "
              f"{t_bis * 1e3:>10.2f}ms")
    if _sturm is not None:
        for ns in sorted({r[0] for r in rows}):
            py = next(r for r in rows if r[0] == ns and r[2] == "python")
            cy = next(r for r in rows if r[0] == ns and r[2] == "cython")
            print(f"ns={ns}: compiled speedup {py[3] / cy[3]:.0f}x on counts, "
                  f"{py[4] / cy[4]:.0f}x on bisection")
    else:
        print("compiled backend unavailable; showing fallback only")

    # agreement guard: both backends must return the same eigenvalues
    if _sturm is not None:
        da, ea, db, eb = _pencil(1001)
        a = _sturm.bisect_smallest(da, ea, db, eb, 5)
        b = _py.bisect_smallest(da, ea, db, eb, 5)
        assert np.allclose(a, b, rtol=0, atol=1e-10 * (1 + np.abs(a).max()))
        print("backend agreement verified")


if __name__ == "__main__":
    main()
