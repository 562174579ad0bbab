"""Kernel backend selected at import time.

The compiled extension ``nhrouter._kernels`` is used when it imports; set
``NHROUTER_BACKEND=python`` to force the pure-Python fallback.
"""
import os

import numpy as np

from . import _fallback

_impl = _fallback
BACKEND = "python"
if os.environ.get("NHROUTER_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _impl  # noqa: F811
        BACKEND = "compiled"
    except ImportError:
        pass


def available_backends():
    names = {"python": _fallback}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        names["compiled"] = _kernels
    return names


def dopri5_linear(l0, ls, coeffs, y0, times, rtol, atol, h0, max_steps):
    return _impl.dopri5_linear(l0, ls, coeffs, y0, times, rtol, atol, h0, max_steps)


def bordered_solve(a, rhs, trace_value):
    a = np.asarray(a, dtype=complex)
    x = _impl.bordered_solve(a, np.asarray(rhs, dtype=complex), trace_value)
    if x is None:
        x = _fallback.bordered_solve(a, rhs, trace_value)
    return x
