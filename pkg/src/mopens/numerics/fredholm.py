"""Nystrom discretization of Fredholm determinants det(I - K) on an interval."""

from __future__ import annotations

import numpy as np

from .quadrature import gauss_legendre


class SingularDiscretization(ArithmeticError):
    pass


def nystrom_matrix(kernel, t: float, upper: float, m: int) -> np.ndarray:
    """The symmetric matrix W^{1/2} K W^{1/2} on m Gauss-Legendre nodes of (t, upper).

    ``kernel(x, y)`` must accept broadcastable arrays.
    """
    rule = gauss_legendre(m, t, upper)
    x = rule.nodes
    sw = np.sqrt(rule.weights)
    k = np.asarray(kernel(x[:, None], x[None, :]), dtype=float)
    return sw[:, None] * k * sw[None, :]


def fredholm_det(kernel, t: float, upper: float, m: int) -> float:
    """det[I - K] for the integral operator with kernel K on L^2(t, upper)."""
    if m < 4:
        raise ValueError("need at least 4 quadrature nodes")
    a = nystrom_matrix(kernel, t, upper, m)
    if not np.all(np.isfinite(a)):
        raise SingularDiscretization("Nystrom matrix has non-finite entries")
    sign, logdet = np.linalg.slogdet(np.eye(m) - a)
    if not np.isfinite(logdet):
        return 0.0
    return float(sign * np.exp(logdet))
