"""numba shim. Set ``CRDTKIT_DISABLE_JIT=1`` to force the pure-numpy kernels."""

import os

JIT_DISABLED = os.environ.get("CRDTKIT_DISABLE_JIT", "").strip().lower() in ("1", "true", "yes")

try:
    import numba as nb
except ImportError:  # pragma: no cover - numba is an optional extra
    nb = None
    JIT_DISABLED = True

HAVE_NUMBA = nb is not None


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if nb is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda func: func
    return nb.njit(*args, **kwargs)
