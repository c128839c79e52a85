"""Numba switch.

Set ``PENTASPEC_DISABLE_NUMBA=1`` before import to run every kernel through
its pure-numpy implementation.  The compiled variants stay importable (when
numba is installed) so benchmarks can compare both paths in one process.
"""
import os

DISABLE_ENV = "PENTASPEC_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _disabled_by_env():
    return os.environ.get(DISABLE_ENV, "").strip().lower() in {"1", "true", "yes", "on"}


HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not _disabled_by_env()


def njit(fn):
    """Compile ``fn`` in nopython mode if numba is importable, else return it."""
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
