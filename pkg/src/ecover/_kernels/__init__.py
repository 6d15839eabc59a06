"""Hot kernels, compiled when available.

The Cython build is selected at import time; set ``EC_PURE_PYTHON=1`` to force
the pure-Python fallback.
"""

import os

from . import _pykernels as python_backend

compiled_backend = None
if not os.environ.get("EC_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend

BACKEND = _active.BACKEND
threshold_edges = _active.threshold_edges
triangles = _active.triangles
free_reduce = _active.free_reduce
cyclic_reduce = _active.cyclic_reduce
exponent_sums = _active.exponent_sums

__all__ = [
    "BACKEND",
    "compiled_backend",
    "python_backend",
    "threshold_edges",
    "triangles",
    "free_reduce",
    "cyclic_reduce",
    "exponent_sums",
]
