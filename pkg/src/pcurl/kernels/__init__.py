"""Backend dispatch for the numeric hot loops.

The active backend is chosen once at import time from the ``PCURL_BACKEND``
environment variable: ``numba`` (default when importable) or ``numpy``.  Both
expose identical functions on plain arrays; agreement is tested to 1e-13
relative.  ``use()`` rebinds the backend at runtime, which the benchmark and
the parity tests rely on.
"""

import os
import warnings

from . import _numpy

_FUNCTIONS = (
    "element_curls",
    "scatter_edge_values",
    "field_at_quad",
    "quad_vec_l2_sq_per_tri",
    "quad_vec_l2_sq",
    "quad_scalar_lp",
    "load_vector",
    "jacobian_entries",
    "mass_entries",
    "normal_jump_integral",
)

try:
    from . import _numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _numba = None
    HAS_NUMBA = False

_active = None
_active_name = ""


def available_backends():
    return ("numba", "numpy") if HAS_NUMBA else ("numpy",)


def get_backend(name):
    """Return the raw backend module for ``name`` without activating it."""
    if name == "numpy":
        return _numpy
    if name == "numba":
        if not HAS_NUMBA:
            raise ValueError("numba backend requested but numba is not importable")
        return _numba
    raise ValueError(f"unknown kernel backend {name!r}")


def use(name):
    """Activate a backend; module-level functions are rebound in place."""
    global _active, _active_name
    _active = get_backend(name)
    _active_name = name
    for fn in _FUNCTIONS:
        globals()[fn] = getattr(_active, fn)


def current():
    return _active_name


_requested = os.environ.get("PCURL_BACKEND", "numba" if HAS_NUMBA else "numpy")
if _requested not in ("numba", "numpy"):
    warnings.warn(
        f"PCURL_BACKEND={_requested!r} not recognized, falling back to numpy",
        stacklevel=1,
    )
    _requested = "numpy"
if _requested == "numba" and not HAS_NUMBA:
    warnings.warn("numba unavailable, using numpy kernels", stacklevel=1)
    _requested = "numpy"
use(_requested)
