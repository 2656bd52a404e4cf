"""Pick the compiled kernels when available, else the pure-Python ones.

Set ``MAPAIR_PURE_PYTHON=1`` to force the fallback (used by the benchmark and
by the backend-parity tests).
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("MAPAIR_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

merge_sign = _impl.merge_sign
wedge_terms = _impl.wedge_terms
poly_mul = _impl.poly_mul
plucker_residual = _impl.plucker_residual
sparse_rref = _impl.sparse_rref

__all__ = [
    "BACKEND",
    "merge_sign",
    "wedge_terms",
    "poly_mul",
    "plucker_residual",
    "sparse_rref",
]
