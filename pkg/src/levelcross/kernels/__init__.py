"""Hot propagation kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time.  Set ``BERRY_USE_NUMBA=0`` to
force the numpy implementation; it is also used automatically when numba
cannot be imported.  Both implementations stay importable as
``levelcross.kernels.numpy_impl`` / ``numba_impl`` for cross-checking.
"""
import os

import numpy as np

from . import _numpy as numpy_impl

try:
    from . import _numba as numba_impl
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_impl = None

_flag = os.environ.get("BERRY_USE_NUMBA", "1").strip().lower()
USE_NUMBA = numba_impl is not None and _flag not in ("0", "false", "no", "off")
BACKEND = "numba" if USE_NUMBA else "numpy"

_impl = numba_impl if USE_NUMBA else numpy_impl


def expm_steps(coeffs, dt):
    return _impl.expm_steps(np.ascontiguousarray(coeffs, dtype=np.float64), float(dt))


def euler_steps(coeffs, dt):
    return _impl.euler_steps(np.ascontiguousarray(coeffs, dtype=np.float64), float(dt))


def propagate(steps, psi0, keep):
    return _impl.propagate(
        np.ascontiguousarray(steps, dtype=np.complex128),
        np.ascontiguousarray(psi0, dtype=np.complex128),
        np.ascontiguousarray(keep, dtype=np.int64),
    )


def warmup():
    """Trigger JIT compilation so later timings exclude it."""
    coeffs = np.zeros((4, 4))
    steps = expm_steps(coeffs, 0.1)
    euler_steps(coeffs, 0.1)
    propagate(steps, np.array([1.0, 0.0], dtype=complex), np.array([0, 4]))


__all__ = ["BACKEND", "USE_NUMBA", "expm_steps", "euler_steps", "propagate",
           "numpy_impl", "numba_impl", "warmup"]
