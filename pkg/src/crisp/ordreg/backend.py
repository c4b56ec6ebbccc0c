"""Loss-kernel selection.

The compiled extension is preferred when importable; setting
``CRISP_PURE_PYTHON=1`` forces the NumPy fallback (the benchmark uses
this to compare the two).  Both kernels share one contract and agree to
floating-point noise.
"""

from __future__ import annotations

import os

import numpy as np

from . import _itloss_py

if os.environ.get("CRISP_PURE_PYTHON"):
    _kernel = _itloss_py.loss_grad
    KERNEL_BACKEND = "python"
else:
    try:
        from . import _itloss_c

        _kernel = _itloss_c.loss_grad
        KERNEL_BACKEND = "cython"
    except ImportError:
        _kernel = _itloss_py.loss_grad
        KERNEL_BACKEND = "python"


def loss_grad(X, y, w, theta0: float, theta1: float, alpha: float):
    """Dispatch to the selected kernel, normalizing array layout."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(w))):
        raise ValueError("non-finite feature or weight values")
    return _kernel(X, y, w, float(theta0), float(theta1), float(alpha))
