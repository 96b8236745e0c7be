"""Pure-Python/numpy implementations of the hot kernels.

Mirrors ``_core.pyx`` function for function; used when the compiled
extension is unavailable or ``MOPENS_PURE_PYTHON`` is set.
"""

import math

import numpy as np

AI0 = 0.355028053887817239260063186004
AIP0 = -0.258819403792806798405183560189
SQRT_PI = 1.772453850905516027298167483341

# Taylor stepping switches to the asymptotic expansions beyond this point.
ASYMPTOTIC_SWITCH = 8.0
MAX_STEP = 0.5


def _taylor_step(x0, y, yp, h):
    # local power series of y'' = x y around x0
    a_prev2 = y
    a_prev1 = yp
    a_k = 0.5 * x0 * y
    val = y + yp * h + a_k * h * h
    der = yp + 2.0 * a_k * h
    # coefficients a_{k-2}, a_{k-1}, a_k with k = 2
    a0, a1, a2 = a_prev2, a_prev1, a_k
    hp = h * h  # h^k for k = 2
    for k in range(3, 80):
        ak = (x0 * a1 + a0) / (k * (k - 1))
        hp_prev = hp
        hp *= h
        term = ak * hp
        val += term
        der += k * ak * hp_prev
        a0, a1, a2 = a1, a2, ak
        if k > 8 and abs(term) <= 1e-18 * abs(val) and abs(a1 * hp_prev) <= 1e-18 * abs(val) + 1e-300:
            break
    return val, der


def _asymptotic_positive(x):
    zeta = 2.0 / 3.0 * x * math.sqrt(x)
    su = 1.0
    sv = 1.0
    u = 1.0
    inv = 1.0 / zeta
    p = 1.0
    last = math.inf
    for k in range(1, 60):
        u *= (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
        v = -(6 * k + 1) / (6 * k - 1) * u
        p *= -inv
        t = abs(u * p)
        if t > last:
            break
        last = t
        su += u * p
        sv += v * p
        if t < 1e-17:
            break
    ex = math.exp(-zeta) / (2.0 * SQRT_PI)
    q = x ** 0.25
    return ex / q * su, -ex * q * sv


def _asymptotic_negative(x):
    z = -x
    zeta = 2.0 / 3.0 * z * math.sqrt(z)
    inv = 1.0 / zeta
    # even/odd partial sums of the u_k and v_k series with alternating signs
    ue, uo, ve, vo = 1.0, 0.0, 1.0, 0.0
    u = 1.0
    p = 1.0
    last = math.inf
    for k in range(1, 60):
        u *= (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
        v = -(6 * k + 1) / (6 * k - 1) * u
        p *= inv
        t = abs(u * p)
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
    phase = zeta - 0.25 * math.pi
    c = math.cos(phase)
    s = math.sin(phase)
    q = z ** 0.25
    ai = (c * ue + s * uo) / (SQRT_PI * q)
    aip = q * (s * ve - c * vo) / SQRT_PI
    return ai, aip


def airy_scalar(x):
    """(Ai(x), Ai'(x)) for a finite real x."""
    if x >= ASYMPTOTIC_SWITCH:
        return _asymptotic_positive(x)
    if x <= -ASYMPTOTIC_SWITCH:
        return _asymptotic_negative(x)
    if x > 0.0:
        y, yp = _asymptotic_positive(ASYMPTOTIC_SWITCH)
        x0 = ASYMPTOTIC_SWITCH
    else:
        y, yp = AI0, AIP0
        x0 = 0.0
    dist = x - x0
    steps = max(1, int(math.ceil(abs(dist) / MAX_STEP)))
    h = dist / steps
    for i in range(steps):
        y, yp = _taylor_step(x0 + i * h, y, yp, h)
    return y, yp


def airy_array(x):
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    ai = np.empty_like(flat)
    aip = np.empty_like(flat)
    for i, xi in enumerate(flat):
        ai[i], aip[i] = airy_scalar(float(xi))
    return ai.reshape(x.shape), aip.reshape(x.shape)


def tridiagonalize(a):
    """Reduce a Hermitian matrix to real symmetric tridiagonal form.

    Returns (d, e) with e[i] = |coupling between rows i and i+1|; the
    phases of the complex subdiagonal are absorbed by a diagonal unitary.
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1:, k]
        norm = np.linalg.norm(x)
        if norm == 0.0:
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        alpha = -phase * norm
        v = x.copy()
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        sub = a[k + 1:, k + 1:]
        p = sub @ v
        kk = np.vdot(v, p).real
        w = p - kk * v
        sub -= 2.0 * (np.outer(v, w.conj()) + np.outer(w, v.conj()))
        a[k + 1, k] = alpha
        a[k, k + 1] = np.conj(alpha)
        a[k + 2:, k] = 0.0
        a[k, k + 2:] = 0.0
    d = a.diagonal().real.copy()
    e = np.zeros(n)
    if n > 1:
        e[:-1] = np.abs(np.diagonal(a, -1))
    return d, e


def tql_eigenvalues(d, e, max_iter=60):
    """Eigenvalues of the symmetric tridiagonal (d, e) by implicit-shift QL.

    ``e[i]`` couples rows i and i+1; ``e[n-1]`` is ignored.
    """
    d = [float(v) for v in d]
    e = [float(v) for v in e]
    n = len(d)
    if n == 0:
        return np.empty(0)
    e[-1] = 0.0
    eps = 2.220446049250313e-16
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                raise ArithmeticError("QL iteration did not converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
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
    return np.sort(np.array(d))


def hermitian_eigenvalues(a):
    d, e = tridiagonalize(a)
    return tql_eigenvalues(d, e)
