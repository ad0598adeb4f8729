"""Backend selection for the hot kernels.

Set ``KSCPD_BACKEND=numpy`` to force the pure-numpy code paths; the default
uses numba when it imports cleanly.
"""

import os

_requested = os.environ.get("KSCPD_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"KSCPD_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

HAS_NUMBA = numba is not None
USE_NUMBA = HAS_NUMBA and _requested == "numba"


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if HAS_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def default_workers():
    """Worker count from ``KSCPD_THREADS`` (defaults to 1)."""
    raw = os.environ.get("KSCPD_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"KSCPD_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)
