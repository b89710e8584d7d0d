"""Backend selection for the hot kernels.

numba is used when importable unless OLIGOCAT_DISABLE_NUMBA is set to a
non-empty value other than "0". The pure-numpy fallbacks live next to the
jitted kernels in :mod:`oligocat.kernels`.
"""
import os

try:
    import numba as _numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    _numba = None
    HAVE_NUMBA = False

_flag = os.environ.get("OLIGOCAT_DISABLE_NUMBA", "")
USE_NUMBA = HAVE_NUMBA and _flag in ("", "0")
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(fn):
    """Wrap ``fn`` with numba's lazy njit, or return None without numba.

    Compilation happens on first call, so importing never pays for it and
    the benchmark can still time both paths when the flag is set.
    """
    if not HAVE_NUMBA:
        return None
    return _numba.njit(cache=True)(fn)
