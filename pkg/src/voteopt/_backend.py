"""Kernel backend selection.

Hot numeric kernels (the quadratic-program solver and the grid-search
enumerator) are compiled with numba when available. Set the environment
variable ``VOTEOPT_BACKEND=numpy`` before import to force the pure-numpy
fallback, or ``VOTEOPT_BACKEND=numba`` to require the compiled path.
Results are deterministic within a backend; the two backends agree to
solver tolerance but not necessarily bit-for-bit.
"""

from __future__ import annotations

import os

_ENV_VAR = "VOTEOPT_BACKEND"

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via VOTEOPT_BACKEND=numpy
    numba = None
    _HAVE_NUMBA = False


def _resolve_backend() -> str:
    requested = os.environ.get(_ENV_VAR, "").strip().lower()
    if requested in ("", "auto"):
        return "numba" if _HAVE_NUMBA else "numpy"
    if requested == "numpy":
        return "numpy"
    if requested == "numba":
        if not _HAVE_NUMBA:
            raise ImportError(
                f"{_ENV_VAR}=numba requested but numba is not installed"
            )
        return "numba"
    raise ValueError(
        f"unrecognized {_ENV_VAR}={requested!r}; expected 'numba' or 'numpy'"
    )


BACKEND = _resolve_backend()


def jit_kernel(func):
    """Compile ``func`` under the numba backend, return it unchanged otherwise.

    Kernels must therefore stick to nopython-compatible numpy: float64/int64
    arrays, no python objects. fastmath stays off so results are reproducible
    run to run.
    """
    if BACKEND == "numba":
        return numba.njit(cache=True, nogil=True)(func)
    return func
