# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for symmetric tridiagonal eigenvalue bisection.

Works on the definite pencil (A, B) with both matrices symmetric tridiagonal
and B positive definite; B = I recovers the ordinary problem, the Numerov
scheme supplies a nontrivial B.  The Sturm-count recurrence is inherently
sequential in the matrix dimension and dominates the 1D eigensolve runtime,
hence the compiled core.  A numpy fallback with identical semantics lives in
`_py.py`.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double _TINY = 1e-300


cdef int _count_below(const double[::1] da, const double[::1] ea,
                      const double[::1] db, const double[::1] eb,
                      double x) noexcept nogil:
    # zero pivots are perturbed to a negative tiny and count as negative,
    # otherwise shifts that hit a leading-minor eigenvalue undercount
    cdef Py_ssize_t i, n = da.shape[0]
    cdef int cnt = 0
    cdef double off
    cdef double q = da[0] - x * db[0]
    if q == 0.0:
        q = -_TINY
    if q < 0.0:
        cnt += 1
    for i in range(1, n):
        off = ea[i - 1] - x * eb[i - 1]
        q = da[i] - x * db[i] - off * off / q
        if q == 0.0:
            q = -_TINY
        if q < 0.0:
            cnt += 1
    return cnt


def count_below(da, ea, db, eb, double x):
    """Number of pencil eigenvalues strictly below x."""
    cdef double[::1] av = np.ascontiguousarray(da, dtype=np.float64)
    cdef double[::1] ev = np.ascontiguousarray(ea, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(db, dtype=np.float64)
    cdef double[::1] fv = np.ascontiguousarray(eb, dtype=np.float64)
    return _count_below(av, ev, bv, fv, x)


def count_below_many(da, ea, db, eb, xs):
    """Vector of Sturm counts, one per shift in xs."""
    cdef double[::1] av = np.ascontiguousarray(da, dtype=np.float64)
    cdef double[::1] ev = np.ascontiguousarray(ea, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(db, dtype=np.float64)
    cdef double[::1] fv = np.ascontiguousarray(eb, dtype=np.float64)
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    out = np.empty(xs.shape[0], dtype=np.int64)
    cdef double[::1] xv = xs
    cdef long long[::1] ov = out
    cdef Py_ssize_t j
    for j in range(xv.shape[0]):
        ov[j] = _count_below(av, ev, bv, fv, xv[j])
    return out


def bisect_smallest(da, ea, db, eb, int m, double tol=1e-12, int max_rounds=200):
    """Smallest m pencil eigenvalues by Sturm-sequence bisection.

    Each eigenvalue is isolated to |err| <= tol * (1 + |mu|).  Returns an
    ascending float64 array of length m; raises RuntimeError if a bracket
    fails to converge within max_rounds rounds.
    """
    cdef double[::1] av = np.ascontiguousarray(da, dtype=np.float64)
    cdef double[::1] ev = np.ascontiguousarray(ea, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(db, dtype=np.float64)
    cdef double[::1] fv = np.ascontiguousarray(eb, dtype=np.float64)
    cdef Py_ssize_t n = av.shape[0]
    if m < 1 or m > n:
        raise ValueError("m out of range")

    cdef double amin = av[0], amax = av[0], bmin = bv[0], bmax = bv[0]
    cdef double ra, rb
    cdef Py_ssize_t i
    for i in range(n):
        ra = 0.0
        rb = 0.0
        if i > 0:
            ra += abs(ev[i - 1])
            rb += abs(fv[i - 1])
        if i < n - 1:
            ra += abs(ev[i])
            rb += abs(fv[i])
        if av[i] - ra < amin:
            amin = av[i] - ra
        if av[i] + ra > amax:
            amax = av[i] + ra
        if bv[i] - rb < bmin:
            bmin = bv[i] - rb
        if bv[i] + rb > bmax:
            bmax = bv[i] + rb
    if bmin <= 0.0:
        raise ValueError("pencil right-hand matrix is not safely positive definite")
    cdef double glo = amin / bmin if amin < 0.0 else amin / bmax
    cdef double ghi = amax / bmin if amax > 0.0 else amax / bmax

    out = np.empty(m, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double lo, hi, mid
    cdef int j, it, ok
    for j in range(m):
        lo = glo
        hi = ghi
        ok = 0
        for it in range(max_rounds):
            mid = 0.5 * (lo + hi)
            if hi - lo <= tol * (1.0 + abs(mid)):
                ok = 1
                break
            if _count_below(av, ev, bv, fv, mid) >= j + 1:
                hi = mid
            else:
                lo = mid
        if not ok:
            raise RuntimeError("bisection bracket failed to converge")
        ov[j] = 0.5 * (lo + hi)
    return out
