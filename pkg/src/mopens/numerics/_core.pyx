# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Airy evaluation and the Hermitian eigenvalue path.

Same algorithms and signatures as ``_pycore``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, fabs, hypot, copysign, cos, sin, ceil, pow, M_PI

cnp.import_array()

cdef double AI0 = 0.355028053887817239260063186004
cdef double AIP0 = -0.258819403792806798405183560189
cdef double SQRT_PI = 1.772453850905516027298167483341
cdef double ASYMPTOTIC_SWITCH = 8.0
cdef double MAX_STEP = 0.5


cdef void _taylor_step(double x0, double y, double yp, double h,
                       double* out_y, double* out_yp) noexcept nogil:
    cdef double a0 = y, a1 = yp, a2 = 0.5 * x0 * y, ak
    cdef double val = y + yp * h + a2 * h * h
    cdef double der = yp + 2.0 * a2 * h
    cdef double hp = h * h, hp_prev, term
    cdef int k
    for k in range(3, 80):
        ak = (x0 * a1 + a0) / (k * (k - 1))
        hp_prev = hp
        hp *= h
        term = ak * hp
        val += term
        der += k * ak * hp_prev
        a0 = a1
        a1 = a2
        a2 = ak
        if k > 8 and fabs(term) <= 1e-18 * fabs(val) and fabs(a1 * hp_prev) <= 1e-18 * fabs(val) + 1e-300:
            break
    out_y[0] = val
    out_yp[0] = der


cdef void _asymptotic_positive(double x, double* ai, double* aip) noexcept nogil:
    cdef double zeta = 2.0 / 3.0 * x * sqrt(x)
    cdef double su = 1.0, sv = 1.0, u = 1.0, v, p = 1.0, t
    cdef double inv = 1.0 / zeta
    cdef double last = 1e308
    cdef int k
    for k in range(1, 60):
        u *= (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
        v = -(6 * k + 1) / (6.0 * k - 1) * u
        p *= -inv
        t = fabs(u * p)
        if t > last:
            break
        last = t
        su += u * p
        sv += v * p
        if t < 1e-17:
            break
    cdef double ex = exp(-zeta) / (2.0 * SQRT_PI)
    cdef double q = pow(x, 0.25)
    ai[0] = ex / q * su
    aip[0] = -ex * q * sv


cdef void _asymptotic_negative(double x, double* ai, double* aip) noexcept nogil:
    cdef double z = -x
    cdef double zeta = 2.0 / 3.0 * z * sqrt(z)
    cdef double inv = 1.0 / zeta
    cdef double ue = 1.0, uo = 0.0, ve = 1.0, vo = 0.0
    cdef double u = 1.0, v, p = 1.0, t, sign
    cdef double last = 1e308
    cdef int k, j
    for k in range(1, 60):
        u *= (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
        v = -(6 * k + 1) / (6.0 * k - 1) * u
        p *= inv
        t = fabs(u * p)
        if t > last:
            break
        last = t
        j = k // 2
        sign = -1.0 if j % 2 else 1.0
        if k % 2 == 0:
            ue += sign * u * p
            ve += sign * v * p
        else:
            uo += sign * u * p
            vo += sign * v * p
        if t < 1e-17:
            break
    cdef double phase = zeta - 0.25 * M_PI
    cdef double c = cos(phase), s = sin(phase)
    cdef double q = pow(z, 0.25)
    ai[0] = (c * ue + s * uo) / (SQRT_PI * q)
    aip[0] = q * (s * ve - c * vo) / SQRT_PI


cdef void _airy(double x, double* ai, double* aip) noexcept nogil:
    cdef double y, yp, x0, dist, h
    cdef int steps, i
    if x >= ASYMPTOTIC_SWITCH:
        _asymptotic_positive(x, ai, aip)
        return
    if x <= -ASYMPTOTIC_SWITCH:
        _asymptotic_negative(x, ai, aip)
        return
    if x > 0.0:
        _asymptotic_positive(ASYMPTOTIC_SWITCH, &y, &yp)
        x0 = ASYMPTOTIC_SWITCH
    else:
        y = AI0
        yp = AIP0
        x0 = 0.0
    dist = x - x0
    steps = <int>ceil(fabs(dist) / MAX_STEP)
    if steps < 1:
        steps = 1
    h = dist / steps
    for i in range(steps):
        _taylor_step(x0 + i * h, y, yp, h, &y, &yp)
    ai[0] = y
    aip[0] = yp


def airy_scalar(double x):
    cdef double ai, aip
    _airy(x, &ai, &aip)
    return ai, aip


def airy_array(x):
    arr = np.ascontiguousarray(x, dtype=np.float64)
    flat = arr.ravel()
    cdef double[::1] xv = flat
    cdef Py_ssize_t n = xv.shape[0], i
    out_ai = np.empty(n)
    out_aip = np.empty(n)
    cdef double[::1] av = out_ai
    cdef double[::1] apv = out_aip
    with nogil:
        for i in range(n):
            _airy(xv[i], &av[i], &apv[i])
    return out_ai.reshape(arr.shape), out_aip.reshape(arr.shape)


def tridiagonalize(a):
    """Householder reduction of a Hermitian matrix to real tridiagonal (d, |e|)."""
    cdef double complex[:, ::1] A = np.array(a, dtype=np.complex128, order="C")
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t k, i, j, m
    cdef double norm, vnorm, kk, absx0
    cdef double complex phase, alpha, x0, s
    v_arr = np.empty(n, dtype=np.complex128)
    p_arr = np.empty(n, dtype=np.complex128)
    w_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] v = v_arr
    cdef double complex[::1] p = p_arr
    cdef double complex[::1] w = w_arr
    with nogil:
        for k in range(n - 2):
            m = n - k - 1
            norm = 0.0
            for i in range(m):
                norm += A[k + 1 + i, k].real * A[k + 1 + i, k].real + A[k + 1 + i, k].imag * A[k + 1 + i, k].imag
            norm = sqrt(norm)
            if norm == 0.0:
                continue
            x0 = A[k + 1, k]
            absx0 = hypot(x0.real, x0.imag)
            if absx0 != 0.0:
                phase = x0 / absx0
            else:
                phase = 1.0
            alpha = -phase * norm
            vnorm = 0.0
            for i in range(m):
                v[i] = A[k + 1 + i, k]
            v[0] = v[0] - alpha
            for i in range(m):
                vnorm += v[i].real * v[i].real + v[i].imag * v[i].imag
            vnorm = sqrt(vnorm)
            if vnorm == 0.0:
                continue
            for i in range(m):
                v[i] = v[i] / vnorm
            # p = A_sub v
            for i in range(m):
                s = 0.0
                for j in range(m):
                    s = s + A[k + 1 + i, k + 1 + j] * v[j]
                p[i] = s
            kk = 0.0
            for i in range(m):
                kk += (v[i].conjugate() * p[i]).real
            for i in range(m):
                w[i] = p[i] - kk * v[i]
            for i in range(m):
                for j in range(m):
                    A[k + 1 + i, k + 1 + j] = A[k + 1 + i, k + 1 + j] - 2.0 * (
                        v[i] * w[j].conjugate() + w[i] * v[j].conjugate())
            A[k + 1, k] = alpha
            A[k, k + 1] = alpha.conjugate()
            for i in range(k + 2, n):
                A[i, k] = 0.0
                A[k, i] = 0.0
    d = np.empty(n)
    e = np.zeros(n)
    for i in range(n):
        d[i] = A[i, i].real
    for i in range(n - 1):
        e[i] = abs(A[i + 1, i])
    return d, e


def tql_eigenvalues(d_in, e_in, int max_iter=60):
    """Eigenvalues of the symmetric tridiagonal (d, e) by implicit-shift QL."""
    d_arr = np.array(d_in, dtype=np.float64)
    e_arr = np.array(e_in, dtype=np.float64)
    cdef double[::1] d = d_arr
    cdef double[::1] e = e_arr
    cdef Py_ssize_t n = d.shape[0]
    if n == 0:
        return np.empty(0)
    cdef Py_ssize_t l, m, i
    cdef int it
    cdef bint underflow, failed = False
    cdef double dd, g, r, s, c, p, f, b
    cdef double eps = 2.220446049250313e-16
    e[n - 1] = 0.0
    with nogil:
        for l in range(n):
            it = 0
            while True:
                m = l
                while m < n - 1:
                    dd = fabs(d[m]) + fabs(d[m + 1])
                    if fabs(e[m]) <= eps * dd:
                        break
                    m += 1
                if m == l:
                    break
                it += 1
                if it > max_iter:
                    failed = True
                    break
                g = (d[l + 1] - d[l]) / (2.0 * e[l])
                r = hypot(g, 1.0)
                g = d[m] - d[l] + e[l] / (g + copysign(r, g))
                s = 1.0
                c = 1.0
                p = 0.0
                i = m - 1
                underflow = False
                while i >= l:
                    f = s * e[i]
                    b = c * e[i]
                    r = hypot(f, g)
                    e[i + 1] = r
                    if r == 0.0:
                        d[i + 1] -= p
                        e[m] = 0.0
                        underflow = True
                        break
                    s = f / r
                    c = g / r
                    g = d[i + 1] - p
                    r = (d[i] - g) * s + 2.0 * c * b
                    p = s * r
                    d[i + 1] = g + p
                    g = c * r - b
                    i -= 1
                if underflow:
                    continue
                d[l] -= p
                e[l] = g
                e[m] = 0.0
            if failed:
                break
    if failed:
        raise ArithmeticError("QL iteration did not converge")
    return np.sort(d_arr)


def hermitian_eigenvalues(a):
    d, e = tridiagonalize(a)
    return tql_eigenvalues(d, e)
