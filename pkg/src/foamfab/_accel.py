"""Backend switch for the compiled kernels.

Set ``FOAMFAB_NO_NUMBA=1`` to force the pure-numpy code paths, e.g. for
debugging or on platforms where numba is unavailable.
"""
from __future__ import annotations

import logging
import os

_FALSY = {"", "0", "false", "no", "off"}


def _flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() not in _FALSY


USE_NUMBA = False
if not _flag("FOAMFAB_NO_NUMBA"):
    try:
        import numba  # noqa: F401

        logging.getLogger("numba").setLevel(logging.WARNING)
        USE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity otherwise."""
    if USE_NUMBA:
        from numba import njit as _njit

        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda func: func


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
