"""Numba acceleration switch.

Hot kernels are written once in plain numpy-compatible Python and compiled
with ``numba.njit`` when available.  Set the environment variable
``POLYSCAT_NO_NUMBA=1`` before import to force the pure-Python/numpy path
(used by the fallback benchmark and as an escape hatch on platforms where
numba is unavailable).
"""

import os

NUMBA_DISABLED = os.environ.get("POLYSCAT_NO_NUMBA", "0") == "1"

if not NUMBA_DISABLED:
    try:
        from numba import njit as _njit

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - exercised via env flag instead
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False

if HAVE_NUMBA:

    def maybe_njit(*args, **kwargs):
        return _njit(*args, cache=True, **kwargs)

else:

    def maybe_njit(*args, **kwargs):
        def wrap(func):
            return func

        if args and callable(args[0]):
            return args[0]
        return wrap
