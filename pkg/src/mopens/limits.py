"""Universal limit kernels: sine, Airy, Pearcey, and the Tracy-Widom distribution.

Pearcey functions are realized as contour integrals

    p(x) = 1/(2 pi i) int_C exp(t^4/4 - b t^2/2 + x t) dt,
    q(y) = 1/(2 pi i) int_{-i oo}^{i oo} exp(-s^4/4 + b s^2/2 - y s) ds,

where C consists of the rays from +-oo e^{i pi/4} to 0 and from 0 to
+-oo e^{-i pi/4}.  Integration by parts gives

    p''' = b p' - x p,        q''' = y q + b q',

and the double integral kernel satisfies
(x - y) P(x, y) = p''(x) q(y) - p'(x) q'(y) + p(x) q''(y) - b p(x) q(y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics.fredholm import fredholm_det
from .numerics.quadrature import gauss_legendre
from .numerics.special import OutOfRange, airy_ai_array

AIRY_RANGE = 40.0
PEARCEY_RANGE = 10.0
TRUNCATION_TOL = 1e-8


class ContourTruncationError(ArithmeticError):
    pass


# sine and Airy


def sine_kernel(x, y):
    """sin(pi (x - y)) / (pi (x - y)), equal to 1 on the diagonal."""
    return np.sinc(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))


def _airy_checked(x):
    x = np.asarray(x, dtype=float)
    if x.size and np.max(np.abs(x)) > AIRY_RANGE:
        raise OutOfRange(f"Airy kernel needs |x| <= {AIRY_RANGE:g}")
    return airy_ai_array(x)


def airy_kernel(x, y):
    """(Ai(x) Ai'(y) - Ai'(x) Ai(y)) / (x - y); diagonal Ai'(x)^2 - x Ai(x)^2.

    For |x - y| < 1e-4 a second-order expansion about the diagonal is used.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    ax, dx = (v.reshape(x.shape) for v in _airy_checked(x))
    ay, dy = (v.reshape(y.shape) for v in _airy_checked(y))
    h = y - x
    near = np.abs(h) < 1e-4
    diag = dx * dx - x * ax * ax
    third = ax * dx + x * x * ax * ax - x * dx * dx
    series = diag - 0.5 * ax * ax * h - third * h * h / 6.0
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (ax * dy - dx * ay) / (x - y)
    out = np.where(near, series, direct)
    return float(out) if out.ndim == 0 else out


def tracy_widom_cdf(t: float, m: int = 60, length: float = 12.0) -> float:
    """F_2(t) = det[I - A] on L^2(t, oo), truncated to (t, t + length)."""
    if t < -10.0:
        raise ValueError("tracy_widom_cdf needs t >= -10")
    if m < 16:
        raise ValueError("tracy_widom_cdf needs m >= 16")
    if t + length > AIRY_RANGE:
        return 1.0
    value = fredholm_det(airy_kernel, t, t + length, m)
    return min(1.0, max(0.0, value))


# Pearcey


@dataclass(frozen=True)
class PearceyParams:
    """Pearcey parameter b and contour quadrature settings.

    R is the truncation length of every ray, m_c the Gauss-Legendre points
    per ray, and delta the offset of the vertices of C from the origin in
    the double integral.
    """

    b: float = 0.0
    R: float = 6.0
    m_c: int = 64
    delta: float = 0.5

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("contour radius R must be positive")
        if self.m_c < 16:
            raise ValueError("need at least 16 quadrature points per ray")
        if not self.delta > 0:
            raise ValueError("vertex offset delta must be positive")

    def doubled(self) -> "PearceyParams":
        return PearceyParams(self.b, 2.0 * self.R, 2 * self.m_c, self.delta)


# directions of C: (incoming angle, outgoing angle, vertex sign)
_C_PIECES = ((math.pi / 4, -math.pi / 4, 1.0), (-3 * math.pi / 4, 3 * math.pi / 4, -1.0))


def _c_contour(params: PearceyParams, delta: float):
    """Nodes on C and weights including dt / (2 pi i)."""
    rule = gauss_legendre(params.m_c, 0.0, params.R)
    rho, w = rule.nodes, rule.weights
    nodes, weights = [], []
    for ang_in, ang_out, side in _C_PIECES:
        vertex = side * delta
        e_in, e_out = np.exp(1j * ang_in), np.exp(1j * ang_out)
        nodes += [vertex + rho * e_in, vertex + rho * e_out]
        weights += [-w * e_in, w * e_out]
    return np.concatenate(nodes), np.concatenate(weights) / (2j * math.pi)


def _s_contour(params: PearceyParams):
    """Nodes s = i sigma on the imaginary axis and weights ds / (2 pi i) = dsigma / (2 pi)."""
    rule = gauss_legendre(params.m_c, 0.0, params.R)
    sigma = np.concatenate([-rule.nodes[::-1], rule.nodes])
    w = np.concatenate([rule.weights[::-1], rule.weights])
    return 1j * sigma, w / (2.0 * math.pi)


def _theta_p(t, x, b):
    return t ** 4 / 4 - b * t ** 2 / 2 + x * t


def _theta_q(s, y, b):
    return -s ** 4 / 4 + b * s ** 2 / 2 - y * s


def _check_range(*args):
    for a in args:
        a = np.asarray(a, dtype=float)
        if a.size and np.max(np.abs(a)) > PEARCEY_RANGE:
            raise OutOfRange(f"Pearcey functions need |x| <= {PEARCEY_RANGE:g}")


def _p_derivs(x, params, delta=0.0):
    t, w = _c_contour(params, delta)
    x = np.asarray(x, dtype=float)
    e = np.exp(_theta_p(t, x[..., None], params.b)) * w
    return tuple(np.real(np.sum(e * t ** k, axis=-1)) for k in range(3))


def _q_derivs(y, params):
    s, w = _s_contour(params)
    y = np.asarray(y, dtype=float)
    e = np.exp(_theta_q(s, y[..., None], params.b)) * w
    return tuple(np.real(np.sum(e * (-s) ** k, axis=-1)) for k in range(3))


def _converged(coarse, fine, what):
    for c, f in zip(coarse, fine):
        scale = np.maximum(1.0, np.abs(f))
        err = float(np.max(np.abs(c - f) / scale)) if np.size(f) else 0.0
        if err > TRUNCATION_TOL:
            raise ContourTruncationError(f"{what}: doubling R changes the value by {err:.2e}")


def pearcey_p(x, params: PearceyParams = PearceyParams(), check: bool = True):
    """(p, p', p'') at x."""
    _check_range(x)
    out = _p_derivs(x, params)
    if check:
        _converged(out, _p_derivs(x, params.doubled()), "p")
    return out


def pearcey_q(y, params: PearceyParams = PearceyParams(), check: bool = True):
    """(q, q', q'') at y."""
    _check_range(y)
    out = _q_derivs(y, params)
    if check:
        _converged(out, _q_derivs(y, params.doubled()), "q")
    return out


def pearcey_pq(x, y=None, params: PearceyParams = PearceyParams(), check: bool = True):
    """((p, p', p'')(x), (q, q', q'')(y)); y defaults to x."""
    y = x if y is None else y
    return pearcey_p(x, params, check), pearcey_q(y, params, check)


def pearcey_kernel_ode(x, y, params: PearceyParams = PearceyParams(), check: bool = True):
    """Pearcey kernel assembled from p, q; the diagonal uses the exact limit
    p'(x) q''(x) - p''(x) q'(x) - x p(x) q(x)."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    (p0, p1, p2), (q0, q1, q2) = pearcey_pq(x, y, params, check)
    b = params.b
    num = p0 * q2 - p1 * q1 + p2 * q0 - b * p0 * q0
    near = np.abs(x - y) < 1e-8 * (1.0 + np.abs(x))
    if np.any(near):
        (d0, d1, d2), (e0, e1, e2) = pearcey_pq(x, x, params, check=False)
        diag = d1 * e2 - d2 * e1 - x * d0 * e0
    else:
        diag = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(near, diag, num / (x - y))
    return float(out) if out.ndim == 0 else out


def _double_integral(x, y, params):
    t, wt = _c_contour(params, params.delta)
    s, ws = _s_contour(params)
    b = params.b
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    et = np.exp(_theta_p(t, x[..., None], b)) * wt          # (..., T)
    es = np.exp(_theta_q(s, y[..., None], b)) * ws          # (..., S)
    inv = 1.0 / (s[None, :] - t[:, None])                   # (T, S)
    return np.real(np.einsum("...t,ts,...s->...", et, inv, es))


def pearcey_kernel_int(x, y, params: PearceyParams = PearceyParams(), check: bool = True):
    """Pearcey kernel from the double contour integral

        1/(2 pi i)^2 int_C dt int_{-i oo}^{i oo} ds
            exp(-s^4/4 + b s^2/2 - y s + t^4/4 - b t^2/2 + x t) / (s - t).

    The vertices of C are moved to +-delta so the contours stay apart; no
    pole is crossed, so the value does not depend on delta.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    _check_range(x, y)
    out = _double_integral(x, y, params)
    if check:
        fine = _double_integral(x, y, params.doubled())
        _converged((out,), (fine,), "Pearcey double integral")
    return float(out) if out.ndim == 0 else out


def _third_derivative(f, x, h):
    # Richardson-extrapolated central difference of the second derivative
    def d(step):
        return (f(x + step) - f(x - step)) / (2 * step)
    return (4.0 * d(h / 2) - d(h)) / 3.0


def pearcey_ode_residuals(x, params: PearceyParams = PearceyParams(), h: float = 1e-2):
    """Residuals p''' - b p' + x p and q''' - x q - b q' at x.

    Third derivatives are finite differences of the computed second
    derivatives.
    """
    x = np.asarray(x, dtype=float)
    b = params.b
    (p0, p1, _), (q0, q1, _) = pearcey_pq(x, x, params, check=False)
    p3 = _third_derivative(lambda u: pearcey_p(u, params, False)[2], x, h)
    q3 = _third_derivative(lambda u: pearcey_q(u, params, False)[2], x, h)
    return p3 - b * p1 + x * p0, q3 - x * q0 - b * q1
