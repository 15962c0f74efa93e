"""JIT acceleration shim.

The simulation kernels are written in a numba-compatible subset of Python.
By default they are compiled with ``numba.njit``; setting the environment
variable ``MPSOCSIM_NO_NUMBA=1`` (or an import failure) selects a pure-Python
fallback that runs the exact same code interpreted.  Results are identical on
both paths; only speed differs (the fallback is orders of magnitude slower,
so keep workloads small with it).

``scripts/benchmark_paths.py`` compares the two paths on a fixed workload.
"""

import os

USING_NUMBA = False

if os.environ.get("MPSOCSIM_NO_NUMBA", "").strip() not in ("", "0"):
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        def wrap(func):
            return func
        return wrap
else:
    try:
        from numba import njit  # noqa: F401
        USING_NUMBA = True
    except ImportError:
        def njit(*args, **kwargs):
            if args and callable(args[0]):
                return args[0]
            def wrap(func):
                return func
            return wrap
