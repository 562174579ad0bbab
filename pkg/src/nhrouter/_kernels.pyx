# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: DOPRI5 integration of linear time-dependent
generators and a Householder least-squares bordered solve.

Semantics match ``_fallback.py``; only the arithmetic ordering differs.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, hypot, pow

from nhrouter.errors import IntegrationError

cnp.import_array()

ctypedef double complex cplx

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247
cdef double A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192
cdef double B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920
cdef double E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40

cdef double SAFETY = 0.9
cdef double BETA = 0.04
cdef double ALPHA = 0.2 - 0.75 * 0.04
cdef double FAC_MIN = 0.2
cdef double FAC_MAX = 10.0
cdef double EPS = 2.220446049250313e-16


cdef inline double cabs(cplx z) nogil:
    return hypot(z.real, z.imag)


cdef void _matvec_acc(const cplx[:, ::1] m, const cplx[::1] y, cplx c, cplx[::1] out) noexcept nogil:
    cdef Py_ssize_t n = m.shape[0], i, j
    cdef cplx acc
    for i in range(n):
        acc = 0
        for j in range(n):
            acc = acc + m[i, j] * y[j]
        out[i] = out[i] + c * acc


cdef class _Generator:
    cdef const cplx[:, ::1] l0
    cdef const cplx[:, :, ::1] ls
    cdef object coeffs
    cdef Py_ssize_t nterms
    cdef cplx[::1] cbuf

    def __init__(self, l0, ls, coeffs):
        self.l0 = l0
        if ls is None or len(ls) == 0:
            self.nterms = 0
            self.ls = np.zeros((1, 1, 1), dtype=complex)
        else:
            self.ls = ls
            self.nterms = ls.shape[0]
        self.coeffs = coeffs
        self.cbuf = np.zeros(max(self.nterms, 1), dtype=complex)

    cdef void eval(self, double t, const cplx[::1] y, cplx[::1] out) except *:
        cdef Py_ssize_t i, k, n = y.shape[0]
        for i in range(n):
            out[i] = 0
        _matvec_acc(self.l0, y, 1.0, out)
        if self.nterms == 0:
            return
        c = self.coeffs(t)
        for k in range(self.nterms):
            self.cbuf[k] = c[k]
        for k in range(self.nterms):
            if self.cbuf[k] != 0:
                _matvec_acc(self.ls[k], y, self.cbuf[k], out)


def dopri5_linear(l0, ls, coeffs, y0, times, double rtol, double atol, double h0,
                  long max_steps):
    """Compiled twin of ``_fallback.dopri5_linear``."""
    l0 = np.ascontiguousarray(l0, dtype=complex)
    if ls is not None and len(ls):
        ls = np.ascontiguousarray(ls, dtype=complex)
    else:
        ls = None
    cdef _Generator gen = _Generator(l0, ls, coeffs)
    cdef cplx[::1] y = np.array(y0, dtype=complex)
    cdef double[::1] tt = np.ascontiguousarray(times, dtype=float)
    cdef Py_ssize_t n = y.shape[0], nt = tt.shape[0], i, idx
    out_arr = np.empty((nt, n), dtype=complex)
    cdef cplx[:, ::1] out = out_arr
    cdef cplx[::1] k1 = np.empty(n, dtype=complex)
    cdef cplx[::1] k2 = np.empty(n, dtype=complex)
    cdef cplx[::1] k3 = np.empty(n, dtype=complex)
    cdef cplx[::1] k4 = np.empty(n, dtype=complex)
    cdef cplx[::1] k5 = np.empty(n, dtype=complex)
    cdef cplx[::1] k6 = np.empty(n, dtype=complex)
    cdef cplx[::1] k7 = np.empty(n, dtype=complex)
    cdef cplx[::1] ytmp = np.empty(n, dtype=complex)
    cdef cplx[::1] ynew = np.empty(n, dtype=complex)
    cdef cplx[::1] swap
    cdef double t = tt[0], h = h0, err_old = 1e-4, t_end, hs, tnew, err, fac, sc, e, ay, an
    cdef long n_acc = 0, n_rej = 0
    cdef bint last, last_rejected = False
    cdef cplx ev

    for i in range(n):
        out[0, i] = y[i]
    gen.eval(t, y, k1)
    for idx in range(1, nt):
        t_end = tt[idx]
        while t < t_end:
            if n_acc + n_rej >= max_steps:
                raise IntegrationError("maximum number of steps exceeded", t)
            if h <= 16 * EPS * max(abs(t), 1.0):
                raise IntegrationError("step size underflow", t)
            last = t + h >= t_end
            hs = t_end - t if last else h
            for i in range(n):
                ytmp[i] = y[i] + hs * (A21 * k1[i])
            gen.eval(t + C2 * hs, ytmp, k2)
            for i in range(n):
                ytmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i])
            gen.eval(t + C3 * hs, ytmp, k3)
            for i in range(n):
                ytmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
            gen.eval(t + C4 * hs, ytmp, k4)
            for i in range(n):
                ytmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
            gen.eval(t + C5 * hs, ytmp, k5)
            for i in range(n):
                ytmp[i] = y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i]
                                       + A64 * k4[i] + A65 * k5[i])
            gen.eval(t + hs, ytmp, k6)
            for i in range(n):
                ynew[i] = y[i] + hs * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i]
                                       + B5 * k5[i] + B6 * k6[i])
            tnew = t_end if last else t + hs
            gen.eval(tnew, ynew, k7)
            err = 0.0
            for i in range(n):
                ev = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                           + E6 * k6[i] + E7 * k7[i])
                ay = cabs(y[i])
                an = cabs(ynew[i])
                sc = atol + rtol * (ay if ay > an else an)
                e = cabs(ev) / sc
                err += e * e
            err = sqrt(err / n)
            if err <= 1.0:
                if err == 0:
                    fac = FAC_MAX
                else:
                    fac = SAFETY * pow(err, -ALPHA) * pow(err_old, BETA)
                fac = min(FAC_MAX, max(FAC_MIN, fac))
                if last_rejected:
                    fac = min(fac, 1.0)
                err_old = max(err, 1e-4)
                for i in range(n):
                    y[i] = ynew[i]
                swap = k1
                k1 = k7
                k7 = swap
                t = tnew
                n_acc += 1
                last_rejected = False
                if hs < h:
                    h = max(h, hs * fac)
                else:
                    h = hs * fac
            else:
                h = hs * max(FAC_MIN, SAFETY * pow(err, -0.2))
                n_rej += 1
                last_rejected = True
        for i in range(n):
            out[idx, i] = y[i]
    return out_arr, n_acc, n_rej


def bordered_solve(a, rhs, trace_value):
    """Householder-QR least squares for [A; vec(I)^T] x = [rhs; trace_value].

    Returns ``None`` when the stacked matrix is numerically rank deficient;
    the caller then falls back to an SVD-based solver.
    """
    a = np.asarray(a, dtype=complex)
    cdef Py_ssize_t n = a.shape[1], m = a.shape[0] + 1
    cdef Py_ssize_t dim = <Py_ssize_t>(sqrt(<double>n) + 0.5)
    mat_arr = np.empty((m, n), dtype=complex)
    mat_arr[:-1] = a
    mat_arr[-1] = 0
    mat_arr[-1, ::dim + 1] = 1.0
    b_arr = np.empty(m, dtype=complex)
    b_arr[:-1] = rhs
    b_arr[-1] = trace_value
    cdef cplx[:, ::1] M = mat_arr
    cdef cplx[::1] b = b_arr
    cdef cplx[::1] v = np.empty(m, dtype=complex)
    x_arr = np.empty(n, dtype=complex)
    cdef cplx[::1] x = x_arr
    cdef Py_ssize_t i, j, k
    cdef double nrm, vn, rmax = 0.0
    cdef cplx alpha, s, phase

    with nogil:
        for k in range(n):
            nrm = 0.0
            for i in range(k, m):
                nrm += M[i, k].real * M[i, k].real + M[i, k].imag * M[i, k].imag
            nrm = sqrt(nrm)
            if nrm == 0.0:
                break
            if cabs(M[k, k]) > 0:
                phase = M[k, k] / cabs(M[k, k])
            else:
                phase = 1.0
            alpha = -phase * nrm
            for i in range(k, m):
                v[i] = M[i, k]
            v[k] = v[k] - alpha
            vn = 0.0
            for i in range(k, m):
                vn += v[i].real * v[i].real + v[i].imag * v[i].imag
            vn = sqrt(vn)
            for i in range(k, m):
                v[i] = v[i] / vn
            for j in range(k, n):
                s = 0
                for i in range(k, m):
                    s = s + v[i].conjugate() * M[i, j]
                for i in range(k, m):
                    M[i, j] = M[i, j] - 2.0 * v[i] * s
            s = 0
            for i in range(k, m):
                s = s + v[i].conjugate() * b[i]
            for i in range(k, m):
                b[i] = b[i] - 2.0 * v[i] * s
            if cabs(M[k, k]) > rmax:
                rmax = cabs(M[k, k])
    for k in range(n):
        if cabs(M[k, k]) <= 1e-12 * max(rmax, 1.0):
            return None
    for k in range(n - 1, -1, -1):
        s = b[k]
        for j in range(k + 1, n):
            s = s - M[k, j] * x[j]
        x[k] = s / M[k, k]
    return x_arr
