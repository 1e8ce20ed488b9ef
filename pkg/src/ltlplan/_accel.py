"""Numba toggle shared by the hot kernels.

Set ``LTLPLAN_DISABLE_NUMBA=1`` to run every kernel through its pure-numpy
path. The flag is read once at import time.
"""

import os

_disabled = os.environ.get("LTLPLAN_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _disabled:
        raise ImportError("disabled by LTLPLAN_DISABLE_NUMBA")
    import numba as _numba
except ImportError:
    _numba = None

NUMBA_ENABLED = _numba is not None

numba_default = {
    "nogil": True,
    "cache": True,
    "fastmath": False,
    "boundscheck": False,
    "error_model": "numpy",
}


def njit(fn):
    """Compile ``fn`` with numba when enabled, otherwise return it unchanged."""
    if _numba is None:
        return fn
    return _numba.njit(**numba_default)(fn)


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
