"""Optional numba acceleration.

Hot kernels are decorated with :func:`maybe_njit`.  Set the environment
variable ``CONEFRONT_NO_NUMBA=1`` to force the pure-Python/numpy fallback
(used by the benchmark and as a safety hatch); the fallback is also selected
automatically when numba is not importable.
"""

import os

try:
    from numba import njit as _njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _njit = None
    _HAVE_NUMBA = False


def _disabled_by_env() -> bool:
    return os.environ.get("CONEFRONT_NO_NUMBA", "").strip() not in ("", "0")


# Decision is taken at import time; tests that exercise the fallback spawn a
# subprocess with the flag set.
USING_NUMBA = _HAVE_NUMBA and not _disabled_by_env()


def maybe_njit(**options):
    """Return ``numba.njit(**options)`` or the identity decorator."""
    if USING_NUMBA:
        options.setdefault("cache", True)
        return _njit(**options)

    def identity(fn):
        return fn

    return identity


def using_numba() -> bool:
    return USING_NUMBA
