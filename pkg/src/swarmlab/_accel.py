"""Numba switch shared by every hot kernel.

Each hot kernel exists twice: a numba-compiled loop version and a numpy
version (or the same loop source left uncompiled when the algorithm is
inherently sequential). :func:`pick` chooses between them once, at import.

Set ``SWARMLAB_NO_NUMBA=1`` (or ``true``/``yes``/``on``) before import to run
the numpy paths. They are also used when numba cannot be imported.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("SWARMLAB_NO_NUMBA", "").strip().lower()
_DISABLED = _FLAG in ("1", "true", "yes", "on")

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and not _DISABLED


def jit(func=None, **kwargs):
    """Lazily compiled ``numba.njit`` twin of ``func``.

    Compilation happens on first call, so a disabled backend costs nothing.
    Without numba the plain function comes back.
    """

    def wrap(f):
        if not HAVE_NUMBA:
            return f
        opts = {"cache": True}
        opts.update(kwargs)
        return _numba.njit(**opts)(f)

    if func is None:
        return wrap
    return wrap(func)


def pick(fast, slow):
    """The numba kernel when acceleration is on, else the numpy one."""
    return fast if USE_NUMBA else slow


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
