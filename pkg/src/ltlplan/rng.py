"""Counter-based uniform draws.

Every draw is a pure function of ``(seed, run, t, stream)`` so the numba
loop, the vectorized numpy path and the step-by-step executor all see the
same numbers regardless of scheduling. The mixer is splitmix64.
"""

import numpy as np

from ._accel import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0

# stream ids
ACTION = 0
SUCCESSOR = 1
LABEL = 2


@njit
def mix64(z):
    # works on uint64 scalars (jitted) and uint64 arrays (numpy)
    z = z + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def seed_key(seed: int) -> np.uint64:
    """Hash a user seed once; the result feeds :func:`uniform`."""
    arr = np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.uint64(mix64(arr)[0])


@njit
def uniform(key, run, t, stream):
    """U[0,1) draw for the given counters.

    In the numpy path ``run`` must be a uint64 array (scalar uint64 math
    raises overflow warnings outside numba); ``key``, ``t`` and ``stream``
    are uint64 scalars.
    """
    z = mix64(mix64(mix64(key ^ run) ^ t) ^ stream)
    return (z >> _S11) * _INV53


def draw(seed: int, run: int, t: int, stream: int) -> float:
    """Scalar convenience wrapper used by the step-wise executor."""
    arr = np.array([run], dtype=np.uint64)
    u = uniform(seed_key(seed), arr, np.uint64(t), np.uint64(stream))
    return float(np.asarray(u)[0])
