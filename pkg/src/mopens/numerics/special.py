"""Special functions: log-Gamma, modified Bessel I_alpha, Airy Ai."""

from __future__ import annotations

import math

import numpy as np

from ._backend import kernels


class DomainError(ValueError):
    pass


class InvalidOrder(ValueError):
    pass


class OutOfRange(ValueError):
    pass


# Lanczos approximation, g = 7, n = 9 (coefficient set from Godfrey / Numerical Recipes 3rd ed.)
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

AIRY_RANGE = 40.0


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    if x < 0.5:
        # reflection keeps the Lanczos sum in its accurate range
        return math.log(math.pi / math.sin(math.pi * x)) - log_gamma(1.0 - x)
    z = x - 1.0
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(acc)


def log_bessel_i(alpha: float, x: float) -> float:
    """ln I_alpha(x); -inf where I_alpha(x) = 0."""
    if not alpha > -1:
        raise InvalidOrder(f"bessel order must exceed -1, got {alpha}")
    if x < 0:
        raise DomainError(f"bessel_i requires x >= 0, got {x}")
    if x == 0.0:
        if alpha == 0.0:
            return 0.0
        return -math.inf if alpha > 0 else math.inf
    if x > 60.0 and x > 2.0 * alpha * alpha:
        return _log_bessel_i_large(alpha, x)
    q = 0.25 * x * x
    term = 1.0
    total = 1.0
    k = 1
    while True:
        term *= q / (k * (k + alpha))
        total += term
        if term < 1e-17 * total and k > q ** 0.5:
            break
        k += 1
        if k > 10000:
            break
    return alpha * math.log(0.5 * x) - log_gamma(alpha + 1.0) + math.log(total)


def _log_bessel_i_large(alpha, x):
    # Hankel expansion; the exponentially small e^{-x} branch is dropped
    mu = 4.0 * alpha * alpha
    term = 1.0
    total = 1.0
    for k in range(1, 40):
        term *= -(mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(term) < 1e-17 * abs(total):
            break
        total += term
    return x - 0.5 * math.log(2.0 * math.pi * x) + math.log(total)


def bessel_i(alpha: float, x: float) -> float:
    """Modified Bessel function of the first kind I_alpha(x), alpha > -1, x >= 0."""
    return math.exp(log_bessel_i(alpha, x))


def airy_ai(x: float) -> tuple[float, float]:
    """Return (Ai(x), Ai'(x)) for |x| <= 40."""
    if not abs(x) <= AIRY_RANGE:
        raise OutOfRange(f"airy_ai evaluated outside [-{AIRY_RANGE}, {AIRY_RANGE}]: {x}")
    return kernels.airy_scalar(float(x))


def airy_ai_array(x) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`airy_ai`."""
    x = np.asarray(x, dtype=float)
    if x.size and not np.all(np.abs(x) <= AIRY_RANGE):
        raise OutOfRange(f"airy_ai evaluated outside [-{AIRY_RANGE}, {AIRY_RANGE}]")
    return kernels.airy_array(x)
