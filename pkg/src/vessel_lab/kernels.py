"""Backend selection for the RK4 kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback is used.  Set ``VESSEL_LAB_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("VESSEL_LAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    else:
        BACKEND = "cython"
else:
    _compiled = None

_impl = _compiled if _compiled is not None else _kernels_py

rk4_linear = _impl.rk4_linear
rk4_sweep = _impl.rk4_sweep

__all__ = ["BACKEND", "rk4_linear", "rk4_sweep"]
