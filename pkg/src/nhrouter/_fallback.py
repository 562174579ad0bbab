"""Pure-Python implementations of the hot kernels.

These mirror ``_kernels.pyx`` step for step and are used when the compiled
extension is unavailable (or when ``NHROUTER_BACKEND=python``).
"""
import numpy as np

from .errors import IntegrationError

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

SAFETY = 0.9
BETA = 0.04
ALPHA = 0.2 - 0.75 * BETA
FAC_MIN = 0.2
FAC_MAX = 10.0


def bordered_solve(a, rhs, trace_value):
    """Least-squares solution of [A; vec(I)^T] x = [rhs; trace_value]."""
    n = a.shape[1]
    dim = int(round(np.sqrt(n)))
    t = np.eye(dim, dtype=complex).reshape(-1, order="F")
    m = np.vstack([a, t[None, :]])
    b = np.concatenate([np.asarray(rhs, dtype=complex), [trace_value]])
    return np.linalg.lstsq(m, b, rcond=None)[0]


def _rhs(l0, ls, coeffs, t, y):
    out = l0 @ y
    if ls is not None:
        c = coeffs(t)
        for k in range(ls.shape[0]):
            if c[k] != 0:
                out = out + c[k] * (ls[k] @ y)
    return out


def _error_norm(err, y, ynew, rtol, atol):
    sc = atol + rtol * np.maximum(np.abs(y), np.abs(ynew))
    return float(np.sqrt(np.mean((np.abs(err) / sc) ** 2)))


def dopri5_linear(l0, ls, coeffs, y0, times, rtol, atol, h0, max_steps):
    """Integrate y' = (L0 + sum_k c_k(t) L_k) y, returning y at each of ``times``.

    Steps are clipped so every requested time is hit exactly. Step control is
    the PI controller of Hairer & Wanner's DOPRI5.
    """
    l0 = np.ascontiguousarray(l0, dtype=complex)
    if ls is not None and len(ls) == 0:
        ls = None
    if ls is not None:
        ls = np.ascontiguousarray(ls, dtype=complex)
    y = np.array(y0, dtype=complex)
    times = np.asarray(times, dtype=float)
    out = np.empty((times.size, y.size), dtype=complex)
    out[0] = y
    t = float(times[0])
    h = float(h0)
    err_old = 1e-4
    n_acc = n_rej = 0
    last_rejected = False
    k1 = _rhs(l0, ls, coeffs, t, y)
    eps = np.finfo(float).eps
    for idx in range(1, times.size):
        t_end = float(times[idx])
        while t < t_end:
            if n_acc + n_rej >= max_steps:
                raise IntegrationError("maximum number of steps exceeded", t)
            if h <= 16 * eps * max(abs(t), 1.0):
                raise IntegrationError("step size underflow", t)
            last = t + h >= t_end
            hs = t_end - t if last else h
            k2 = _rhs(l0, ls, coeffs, t + C2 * hs, y + hs * (A21 * k1))
            k3 = _rhs(l0, ls, coeffs, t + C3 * hs, y + hs * (A31 * k1 + A32 * k2))
            k4 = _rhs(l0, ls, coeffs, t + C4 * hs, y + hs * (A41 * k1 + A42 * k2 + A43 * k3))
            k5 = _rhs(
                l0, ls, coeffs, t + C5 * hs,
                y + hs * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
            )
            k6 = _rhs(
                l0, ls, coeffs, t + hs,
                y + hs * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
            )
            ynew = y + hs * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
            tnew = t_end if last else t + hs
            k7 = _rhs(l0, ls, coeffs, tnew, ynew)
            errv = hs * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
            err = _error_norm(errv, y, ynew, rtol, atol)
            if err <= 1.0:
                fac = FAC_MAX if err == 0 else SAFETY * err**-ALPHA * err_old**BETA
                fac = min(FAC_MAX, max(FAC_MIN, fac))
                if last_rejected:
                    fac = min(fac, 1.0)
                err_old = max(err, 1e-4)
                y, t, k1 = ynew, tnew, k7
                n_acc += 1
                last_rejected = False
                # a step clipped to hit an output time must not shrink later steps
                h = max(h, hs * fac) if hs < h else hs * fac
            else:
                h = hs * max(FAC_MIN, SAFETY * err**-0.2)
                n_rej += 1
                last_rejected = True
        out[idx] = y
    return out, n_acc, n_rej

