"""Weight families for MOP ensembles and the Karlin-McGregor transition densities.

Weights are indexed from 0.  Every family evaluates ``log |w_j(x)|`` and the
sign of ``w_j(x)`` so that ensembles with large ``n`` never under- or
overflow; :func:`eval_weight` exponentiates at the boundary.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .numerics.quadrature import composite_legendre
from .numerics.special import log_bessel_i


class OutOfSupport(ValueError):
    pass


class NonSortedInput(ValueError):
    pass


class WeightKind(str, Enum):
    MULTIPLE_HERMITE = "multiple-hermite"
    EXTERNAL_SOURCE = "external-source"
    SQUARED_BESSEL_PAIR = "squared-bessel-pair"
    TWO_MATRIX_INDUCED = "two-matrix-induced"
    TABULATED = "tabulated"


def _poly(coeffs: Sequence[float], x):
    """Evaluate sum_k coeffs[k] x^k."""
    return np.polynomial.polynomial.polyval(x, np.asarray(coeffs, dtype=float))


def check_even_confining(coeffs: Sequence[float]) -> None:
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    if c.size < 3 or (c.size - 1) % 2 or c[-1] <= 0:
        raise ValueError("potential must have even degree >= 2 and a positive leading coefficient")


# inner-integral quadrature for the two-matrix weights: 8 panels x 20 nodes on [-1, 1]
_INNER = composite_legendre(8, 20, -1.0, 1.0)
_INNER_DECAY = 50.0


@dataclass(frozen=True)
class WeightFamily:
    """A family of r weights w_0, ..., w_{r-1}.

    Use the constructors :meth:`multiple_hermite`, :meth:`external_source`,
    :meth:`squared_bessel_pair`, :meth:`two_matrix_induced`, :meth:`gue` and
    :meth:`tabulated` rather than calling this directly.
    """

    kind: WeightKind
    r: int
    n: int = 1
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("a family needs at least one weight")
        if self.n < 1:
            raise ValueError("scale n must be a positive integer")
        if self.kind is WeightKind.SQUARED_BESSEL_PAIR and self.r != 2:
            raise ValueError("squared-bessel-pair has exactly two weights")
        if self.kind is WeightKind.TWO_MATRIX_INDUCED and self.r != 3:
            raise ValueError("two-matrix-induced family with W = y^4/4 has r = 3")

    # constructors

    @classmethod
    def multiple_hermite(cls, a: Sequence[float], t: float = 0.5, T: float = 1.0, n: int = 1):
        """w_j(x) = exp(n (-T x^2 / (2 t (T - t)) + a_j x / t))."""
        if not 0 < t < T:
            raise ValueError("need 0 < t < T")
        return cls(WeightKind.MULTIPLE_HERMITE, len(a), n, {"a": tuple(map(float, a)), "t": float(t), "T": float(T)})

    @classmethod
    def external_source(cls, V: Sequence[float], a: Sequence[float], n: int = 1):
        """w_j(x) = exp(-n (V(x) - a_j x)); V given by ascending coefficients."""
        check_even_confining(V)
        return cls(WeightKind.EXTERNAL_SOURCE, len(a), n, {"V": tuple(map(float, V)), "a": tuple(map(float, a))})

    @classmethod
    def gue(cls, n: int):
        """The single Gaussian weight exp(-n x^2 / 2)."""
        return cls.external_source((0.0, 0.0, 0.5), (0.0,), n)

    @classmethod
    def squared_bessel_pair(cls, alpha: float, a: float, t: float = 0.5, T: float = 1.0):
        if not alpha > -1:
            raise ValueError("alpha must exceed -1")
        if not a > 0:
            raise ValueError("starting point a must be positive")
        if not 0 < t < T:
            raise ValueError("need 0 < t < T")
        return cls(WeightKind.SQUARED_BESSEL_PAIR, 2, 1,
                   {"alpha": float(alpha), "a": float(a), "t": float(t), "T": float(T)})

    @classmethod
    def two_matrix_induced(cls, V: Sequence[float], tau: float, n: int = 1):
        """w_j(x) = exp(-n V(x)) int y^j exp(-n (y^4/4 - tau x y)) dy, j = 0, 1, 2."""
        check_even_confining(V)
        if tau == 0:
            raise ValueError("coupling tau must be nonzero")
        return cls(WeightKind.TWO_MATRIX_INDUCED, 3, n, {"V": tuple(map(float, V)), "tau": float(tau)})

    @classmethod
    def tabulated(cls, x: Sequence[float], values: np.ndarray):
        """Weights sampled on a grid; ``values`` has shape (len(x), r)."""
        from scipy.interpolate import PchipInterpolator

        x = np.asarray(x, dtype=float)
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if x.ndim != 1 or values.shape[0] != x.size or x.size < 2:
            raise ValueError("need at least two samples and one value column per weight")
        if not np.all(np.diff(x) > 0):
            raise NonSortedInput("tabulated abscissae must be strictly increasing")
        interp = tuple(PchipInterpolator(x, values[:, j], extrapolate=False) for j in range(values.shape[1]))
        return cls(WeightKind.TABULATED, values.shape[1], 1,
                   {"x": tuple(x), "interp": interp, "values": values.tolist()})

    @classmethod
    def from_csv(cls, path):
        """Read a tabulated family from CSV with header ``x,w1,...,wr``."""
        with open(Path(path), newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        if not header or header[0].strip() != "x" or len(header) < 2:
            raise ValueError("tabulated weight CSV needs header x,w1,...,wr")
        data = np.array([[float(v) for v in row] for row in body if row])
        return cls.tabulated(data[:, 0], data[:, 1:])

    # geometry

    @property
    def support(self) -> tuple[float, float]:
        if self.kind is WeightKind.SQUARED_BESSEL_PAIR:
            return (0.0, math.inf)
        if self.kind is WeightKind.TABULATED:
            xs = self.params["x"]
            return (xs[0], xs[-1])
        return (-math.inf, math.inf)

    def check_support(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        if x.size and (np.any(x < lo) or np.any(x > hi) or not np.all(np.isfinite(x))):
            raise OutOfSupport(f"{self.kind.value} weights evaluated outside support [{lo}, {hi}]")
        return x

    # evaluation

    def log_weight(self, j: int, x) -> tuple[np.ndarray, np.ndarray]:
        """Return (sign, log|w_j(x)|) as arrays shaped like x."""
        if not 0 <= j < self.r:
            raise IndexError(f"weight index {j} outside 0..{self.r - 1}")
        x = self.check_support(x)
        kind = self.kind
        p = self.params
        if kind is WeightKind.MULTIPLE_HERMITE:
            t, T = p["t"], p["T"]
            logw = self.n * (-T * x * x / (2.0 * t * (T - t)) + p["a"][j] * x / t)
            return np.ones_like(x), logw
        if kind is WeightKind.EXTERNAL_SOURCE:
            logw = -self.n * (_poly(p["V"], x) - p["a"][j] * x)
            return np.ones_like(x), logw
        if kind is WeightKind.SQUARED_BESSEL_PAIR:
            return self._log_bessel_weight(j, x)
        if kind is WeightKind.TWO_MATRIX_INDUCED:
            sign, logi = self._log_inner_integral(j, x)
            return sign, logi - self.n * _poly(p["V"], x)
        vals = np.nan_to_num(p["interp"][j](x), nan=0.0)
        with np.errstate(divide="ignore"):
            return np.sign(vals), np.log(np.abs(vals))

    def __call__(self, j: int, x) -> np.ndarray:
        sign, logw = self.log_weight(j, x)
        return sign * np.exp(logw)

    def _log_bessel_weight(self, j, x):
        p = self.params
        alpha, a, t, T = p["alpha"], p["a"], p["t"], p["T"]
        order = alpha + j
        flat = x.ravel()
        out = np.empty_like(flat)
        for i, xi in enumerate(flat):
            if xi == 0.0:
                out[i] = 0.0 if order == 0 else (-math.inf if order > 0 else math.inf)
                continue
            out[i] = (0.5 * order * math.log(xi) - T * xi / (2.0 * t * (T - t))
                      + log_bessel_i(order, math.sqrt(a * xi) / t))
        return np.ones_like(x), out.reshape(x.shape)

    def _log_inner_integral(self, j, x):
        # log of int y^j exp(-n (y^4/4 - tau x y)) dy, integrated around the
        # unique maximizer y* = cbrt(tau x) of the exponent
        # evaluated at |tau x|; I_j(-s) = (-1)^j I_j(s) restores the sign exactly
        n = self.n
        signed = self.params["tau"] * x.ravel()
        tx = np.abs(signed)
        ystar = np.cbrt(tx)
        # g(y*+d) - g(y*) >= max(d^4/12, d^2 y*^2/2) bounds the truncation error
        half = (12.0 * _INNER_DECAY / n) ** 0.25
        with np.errstate(divide="ignore"):
            quad = np.sqrt(2.0 * _INNER_DECAY / n) / np.abs(ystar)
        half = np.minimum(half, quad)
        y = ystar[:, None] + half[:, None] * _INNER.nodes[None, :]
        expo = -n * (0.25 * y ** 4 - tx[:, None] * y)
        peak = -n * (0.25 * ystar ** 4 - tx * ystar)
        vals = y ** j * np.exp(expo - peak[:, None])
        s = (vals @ _INNER.weights) * half
        if j % 2:
            s = np.where(signed < 0, -s, s)
            s = np.where(signed == 0, 0.0, s)
        with np.errstate(divide="ignore"):
            logi = np.log(np.abs(s)) + peak
        return np.sign(s).reshape(x.shape), logi.reshape(x.shape)


def eval_weight(fam: WeightFamily, j: int, x):
    """w_j(x) for weight index j in 0..r-1; scalar in, scalar out."""
    value = fam(j, x)
    return float(value) if np.ndim(value) == 0 else value


def log_gauge(fam: WeightFamily, x) -> np.ndarray:
    """log of (1/r) sum_j |w_j(x)|, a positive reference function for the family."""
    logs = np.stack([fam.log_weight(j, x)[1] for j in range(fam.r)])
    top = np.max(logs, axis=0)
    safe = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = safe + np.log(np.sum(np.exp(logs - safe), axis=0) / fam.r)
    return np.where(np.isfinite(top), out, top)


# transition densities


@dataclass(frozen=True)
class TransitionKind:
    """Brownian motion (``alpha is None``) or squared Bessel process of order alpha."""

    alpha: float | None = None

    def __post_init__(self):
        if self.alpha is not None and not self.alpha > -1:
            raise ValueError("squared Bessel order must exceed -1")

    @classmethod
    def brownian(cls):
        return cls(None)

    @classmethod
    def squared_bessel(cls, alpha: float):
        return cls(float(alpha))

    @property
    def is_brownian(self) -> bool:
        return self.alpha is None


def transition_density(k: TransitionKind, t: float, x: float, y: float) -> float:
    """p_t(x, y); unit-variance Brownian motion or the squared Bessel process."""
    if not t > 0:
        raise ValueError("time must be positive")
    if k.is_brownian:
        return math.exp(-(x - y) ** 2 / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)
    if not (x > 0 and y > 0):
        raise OutOfSupport("squared Bessel transition density needs x, y > 0")
    alpha = k.alpha
    logp = (-math.log(2.0 * t) + 0.5 * alpha * (math.log(y) - math.log(x))
            - (x + y) / (2.0 * t) + log_bessel_i(alpha, math.sqrt(x * y) / t))
    return math.exp(logp)


def _check_increasing(v, name, strict=True):
    v = np.asarray(v, dtype=float)
    diffs = np.diff(v)
    if (strict and np.any(diffs <= 0)) or np.any(diffs < 0):
        raise NonSortedInput(f"{name} must be {'strictly ' if strict else ''}increasing")
    return v


def kmg_density(k: TransitionKind, t: float, T: float, a, b, x) -> float:
    """Unnormalized Karlin-McGregor density det[p_t(a_j, x_k)] det[p_{T-t}(x_k, b_l)]."""
    if not 0 < t < T:
        raise ValueError("need 0 < t < T")
    a = _check_increasing(a, "a")
    b = _check_increasing(b, "b")
    x = _check_increasing(x, "x", strict=False)
    if not a.size == b.size == x.size:
        raise ValueError("a, b and x must have equal lengths")
    left = np.array([[transition_density(k, t, aj, xk) for xk in x] for aj in a])
    right = np.array([[transition_density(k, T - t, xk, bl) for bl in b] for xk in x])
    return float(np.linalg.det(left) * np.linalg.det(right))
