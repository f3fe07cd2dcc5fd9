"""Kernel backends: numba-jitted hot loops with a pure-numpy fallback.

The active backend is chosen once at import time from the environment
variable ``GRAINKIN_BACKEND`` (``numba`` or ``numpy``).  Without the
variable, numba is used when it imports cleanly and numpy otherwise.
Both backends expose the same five functions:

    coupling_cols(g, jup, jlo, kappa)            -> (J g^k) columnwise
    moments_arrays(g, xi, sign, eps)             -> (X, Y, Q)
    gamma_terms(g, X, sign, eps, jup, jlo,
                kappa, wsix, numw)               -> (num, den)
    rhs_array(g, cp, cm, kd, jup, jlo,
              kappa, gamma)                      -> dg/dt array
    run_block(...)                               -> fused Euler stepping loop

The numba backend accumulates reductions in a fixed order (class-major,
grid-minor) with compensated summation, so repeated runs are
bit-reproducible for a fixed build.
"""

from __future__ import annotations

import os

from . import numpy_impl

_BACKENDS = {"numpy": numpy_impl}
_ACTIVE = None
_IMPORT_ERROR: Exception | None = None


def _load_numba():
    global _IMPORT_ERROR
    if "numba" in _BACKENDS:
        return _BACKENDS["numba"]
    try:
        from . import numba_impl
    except Exception as exc:  # pragma: no cover - exercised only without numba
        _IMPORT_ERROR = exc
        return None
    _BACKENDS["numba"] = numba_impl
    return numba_impl


def select_backend(name: str | None = None):
    """Set (and return) the active backend; None picks from the environment."""
    global _ACTIVE
    if name is None:
        name = os.environ.get("GRAINKIN_BACKEND", "").strip().lower() or None
    if name is None:
        _ACTIVE = _load_numba() or numpy_impl
    elif name == "numpy":
        _ACTIVE = numpy_impl
    elif name == "numba":
        mod = _load_numba()
        if mod is None:
            raise ImportError(f"numba backend requested but unavailable: {_IMPORT_ERROR}")
        _ACTIVE = mod
    else:
        raise ValueError(f"unknown backend {name!r} (expected 'numba' or 'numpy')")
    return _ACTIVE


def active_backend():
    global _ACTIVE
    if _ACTIVE is None:
        select_backend()
    return _ACTIVE


def backend_name() -> str:
    be = active_backend()
    return "numba" if be is _BACKENDS.get("numba") else "numpy"
