"""Numba toggle for the hot kernels.

Every kernel in :mod:`fracdirac._kernels` exists twice: a loop version compiled
with ``numba.njit`` and a vectorised pure-numpy version.  The loop version is
used when numba is importable and ``FRACDIRAC_NUMBA`` is not set to a false
value (``0``, ``false``, ``no``, ``off``).
"""

from __future__ import annotations

import contextlib
import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_FALSE = {"0", "false", "no", "off"}


def _flag_from_env() -> bool:
    return os.environ.get("FRACDIRAC_NUMBA", "1").strip().lower() not in _FALSE


_use_numba = HAVE_NUMBA and _flag_from_env()


def use_numba() -> bool:
    return _use_numba


def set_backend(name: str) -> None:
    """Select ``"numba"`` or ``"numpy"`` kernels for the whole process."""
    global _use_numba
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _use_numba = name == "numba"


@contextlib.contextmanager
def backend(name: str):
    previous = "numba" if _use_numba else "numpy"
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def njit(func):
    """Compile ``func`` with numba if available, else return it unchanged."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def njit_reassoc(func):
    """Like :func:`njit` but lets LLVM reorder float sums so reductions vectorise."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True, fastmath={"reassoc", "contract"})(func)
