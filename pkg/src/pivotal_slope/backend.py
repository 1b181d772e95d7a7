"""Kernel backend selection.

The hot inner loop (the stack-based pool-adjacent-violators pass inside the
sorted-l1 prox) is compiled with numba when available.  Set the environment
variable ``PIVOTAL_SLOPE_BACKEND=numpy`` before import to force the pure-numpy
path, or ``=numba`` to require the compiled one.  Both paths run identical
arithmetic and return bit-identical results.
"""

import os

_ENV_VAR = "PIVOTAL_SLOPE_BACKEND"
_requested = os.environ.get(_ENV_VAR, "").strip().lower()

if _requested not in ("", "numba", "numpy"):
    raise RuntimeError(
        f"{_ENV_VAR}={_requested!r} not understood; use 'numba' or 'numpy'"
    )

if _requested in ("", "numba"):
    try:
        from numba import njit as _njit

        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        BACKEND = "numpy"
else:
    BACKEND = "numpy"


def jit(fn):
    """Compile ``fn`` with numba on the numba backend, else return it as-is."""
    if BACKEND == "numba":
        return _njit(cache=True)(fn)
    return fn
