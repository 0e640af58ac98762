"""Kernel backend selection.

Hot loops (Faddeeva evaluation, Crank-Nicolson sweeps) ship in two flavours:
a numba-compiled scalar loop and a vectorised numpy path.  The default is
numba when it imports; set ``SWITCHTRAP_BACKEND=numpy`` to force the fallback.
"""

from __future__ import annotations

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

ENV_VAR = "SWITCHTRAP_BACKEND"
BACKENDS = ("numba", "numpy")


def njit(func):
    """``numba.njit`` with caching, or the bare function when numba is absent."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def resolve(backend: str | None = None) -> str:
    """Return the backend to use, honouring an explicit choice over the env flag."""
    name = backend if backend is not None else os.environ.get(ENV_VAR, "numba")
    name = name.strip().lower()
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; expected one of {BACKENDS}")
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name
