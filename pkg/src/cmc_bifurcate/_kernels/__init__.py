"""Backend selection for the tridiagonal bisection kernels.

The compiled Cython extension is preferred when it imported cleanly; setting
CMC_BIFURCATE_BACKEND=python forces the numpy fallback (used by the benchmark
and the backend-parity tests).
"""

import os

BACKEND = "python"

if os.environ.get("CMC_BIFURCATE_BACKEND", "").lower() not in ("python", "py"):
    try:
        from ._sturm import bisect_smallest, count_below, count_below_many  # noqa: F401

        BACKEND = "cython"
    except ImportError:
        pass

if BACKEND == "python":
    from ._py import bisect_smallest, count_below, count_below_many  # noqa: F401

__all__ = ["BACKEND", "bisect_smallest", "count_below", "count_below_many"]
