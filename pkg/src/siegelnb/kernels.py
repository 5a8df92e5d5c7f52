"""Kernel selection: compiled extension when available, else pure Python.

Set ``SIEGELNB_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("SIEGELNB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels

mul_trunc = _impl.mul_trunc
mul_scalar = _impl.mul_scalar
mul_binomial = _impl.mul_binomial
inv_scaled = _impl.inv_scaled

__all__ = ["BACKEND", "mul_trunc", "mul_scalar", "mul_binomial", "inv_scaled"]
