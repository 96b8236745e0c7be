"""Gauss quadrature rules.

Nodes and weights come from numpy's Golub-Welsch/Newton implementations;
this module wraps them in an immutable rule object that knows its domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class InvalidInterval(ValueError):
    pass


class RuleKind(str, Enum):
    LEGENDRE = "legendre-on-interval"
    HERMITE = "hermite-gaussian"


@dataclass(frozen=True)
class QuadratureRule:
    """A quadrature rule ``sum_i weights[i] * f(nodes[i])``.

    For the Hermite kind the rule approximates ``int f(x) exp(-x^2) dx``;
    for the Legendre kind it approximates ``int_lo^hi f(x) dx``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: RuleKind
    interval: tuple[float, float] = field(default=(-math.inf, math.inf))

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-d arrays of equal length")
        if nodes.size > 1 and not np.all(np.diff(nodes) > 0):
            raise ValueError("nodes must be strictly increasing")
        if not np.all(weights > 0):
            raise ValueError("weights must be positive")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.nodes.size

    @property
    def lo(self) -> float:
        return self.interval[0]

    @property
    def hi(self) -> float:
        return self.interval[1]

    def integrate(self, f) -> float:
        """Apply the rule to a vectorized callable or to sampled values."""
        values = f(self.nodes) if callable(f) else np.asarray(f)
        return float(np.dot(self.weights, values))


def gauss_legendre(m: int, lo: float = -1.0, hi: float = 1.0) -> QuadratureRule:
    """m-point Gauss-Legendre rule on (lo, hi); exact for degree <= 2m-1."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if not lo < hi:
        raise InvalidInterval(f"invalid interval ({lo}, {hi})")
    x, w = np.polynomial.legendre.leggauss(m)
    half = 0.5 * (hi - lo)
    nodes = lo + half * (x + 1.0)
    return QuadratureRule(nodes, w * half, RuleKind.LEGENDRE, (float(lo), float(hi)))


def gauss_hermite(m: int) -> QuadratureRule:
    """m-point Gauss-Hermite rule for the weight exp(-x^2) on the real line."""
    if m < 1:
        raise ValueError("m must be >= 1")
    x, w = np.polynomial.hermite.hermgauss(m)
    return QuadratureRule(x, w, RuleKind.HERMITE)


def composite_legendre(panels: int, m: int, lo: float, hi: float) -> QuadratureRule:
    """Gauss-Legendre rule repeated on ``panels`` equal subintervals of (lo, hi)."""
    if panels < 1:
        raise ValueError("panels must be >= 1")
    if not lo < hi:
        raise InvalidInterval(f"invalid interval ({lo}, {hi})")
    base = gauss_legendre(m, 0.0, 1.0)
    width = (hi - lo) / panels
    starts = lo + width * np.arange(panels)
    nodes = (starts[:, None] + width * base.nodes[None, :]).ravel()
    weights = np.tile(base.weights * width, panels)
    return QuadratureRule(nodes, weights, RuleKind.LEGENDRE, (float(lo), float(hi)))
