"""Pure numpy fallback for the tridiagonal-pencil bisection kernels.

The Sturm recurrence is sequential in the matrix dimension; here it is
vectorized across shifts instead, so a bisection round for all m target
eigenvalues costs a single pass over the pencil.
"""

from __future__ import annotations

import numpy as np

_TINY = 1e-300


def _counts(da, ea, db, eb, xs: np.ndarray) -> np.ndarray:
    # zero pivots are perturbed to a negative tiny and count as negative,
    # otherwise shifts that hit a leading-minor eigenvalue undercount
    q = da[0] - xs * db[0]
    q = np.where(q == 0.0, -_TINY, q)
    cnt = (q < 0).astype(np.int64)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        for i in range(1, da.size):
            off = ea[i - 1] - xs * eb[i - 1]
            q = da[i] - xs * db[i] - off * off / q
            q = np.where(q == 0.0, -_TINY, q)
            cnt += q < 0
    return cnt


def _arrs(da, ea, db, eb):
    return (np.asarray(da, dtype=np.float64), np.asarray(ea, dtype=np.float64),
            np.asarray(db, dtype=np.float64), np.asarray(eb, dtype=np.float64))


def count_below(da, ea, db, eb, x: float) -> int:
    da, ea, db, eb = _arrs(da, ea, db, eb)
    return int(_counts(da, ea, db, eb, np.array([x]))[0])


def count_below_many(da, ea, db, eb, xs) -> np.ndarray:
    da, ea, db, eb = _arrs(da, ea, db, eb)
    return _counts(da, ea, db, eb, np.asarray(xs, dtype=np.float64))


def bisect_smallest(da, ea, db, eb, m: int, tol: float = 1e-12,
                    max_rounds: int = 200) -> np.ndarray:
    da, ea, db, eb = _arrs(da, ea, db, eb)
    n = da.size
    if m < 1 or m > n:
        raise ValueError("m out of range")

    ra = np.zeros(n)
    ra[1:] += np.abs(ea)
    ra[:-1] += np.abs(ea)
    rb = np.zeros(n)
    rb[1:] += np.abs(eb)
    rb[:-1] += np.abs(eb)
    amin = float(np.min(da - ra))
    amax = float(np.max(da + ra))
    bmin = float(np.min(db - rb))
    bmax = float(np.max(db + rb))
    if bmin <= 0.0:
        raise ValueError("pencil right-hand matrix is not safely positive definite")
    glo = amin / bmin if amin < 0.0 else amin / bmax
    ghi = amax / bmin if amax > 0.0 else amax / bmax

    lo = np.full(m, glo)
    hi = np.full(m, ghi)
    targets = np.arange(1, m + 1)
    for _ in range(max_rounds):
        mid = 0.5 * (lo + hi)
        active = (hi - lo) > tol * (1.0 + np.abs(mid))
        if not active.any():
            return 0.5 * (lo + hi)
        cnt = _counts(da, ea, db, eb, mid[active])
        below = cnt >= targets[active]
        idx = np.flatnonzero(active)
        hi[idx[below]] = mid[idx[below]]
        lo[idx[~below]] = mid[idx[~below]]
    raise RuntimeError("bisection bracket failed to converge")
