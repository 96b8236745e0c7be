"""Multiple orthogonal polynomials and the finite-n MOP ensemble kernel.

The kernel is assembled by biorthogonalization.  With
``Phi_j = p_j sqrt(g)`` (p_j orthonormal for a positive gauge g) and
``Psi_{k,i} = q_{k,i} w_k / sqrt(g)`` (q_{k,i} orthonormal for w_k^2/g,
i < n_k), the projection kernel is

    K(x, y) = Phi(x)^T (G^T)^{-1} Psi(y),     G_{jm} = int Phi_j Psi_m dx.

This is the raw MOP kernel conjugated by sqrt(g(x)/g(y)), which leaves every
correlation determinant unchanged; for a single weight g = w and K is the
symmetric Christoffel-Darboux kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .numerics.quadrature import QuadratureRule, gauss_legendre
from .weights import WeightFamily, WeightKind, log_gauge

CONDITION_LIMIT = 1e12
TAIL_TOLERANCE = 1e-14


class NonUniqueMOP(ArithmeticError):
    pass


class SingularGram(ArithmeticError):
    pass


class OutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class MultiIndex:
    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(v) for v in self.entries)
        if not entries or any(v < 0 for v in entries):
            raise ValueError("multi-index needs r >= 1 nonnegative entries")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def of(cls, *entries):
        if len(entries) == 1 and not isinstance(entries[0], int):
            entries = tuple(entries[0])
        return cls(tuple(entries))

    @classmethod
    def balanced(cls, n: int, r: int):
        """n_j = ceil(n/r) for the first n mod r entries, floor(n/r) for the rest."""
        p, q = divmod(n, r)
        return cls(tuple(p + 1 if j < q else p for j in range(r)))

    @property
    def r(self) -> int:
        return len(self.entries)

    @property
    def total(self) -> int:
        return sum(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, k):
        return self.entries[k]


def _as_multi_index(nu) -> MultiIndex:
    return nu if isinstance(nu, MultiIndex) else MultiIndex.of(nu)


# orthonormal polynomial bases on discrete measures


@dataclass(frozen=True)
class Recurrence:
    """Three-term recurrence of polynomials orthonormal for a discrete measure.

    p_{-1} = 0, p_0 = 1 / sqrt(mass),
    b_{k+1} p_{k+1}(x) = (x - a_k) p_k(x) - b_k p_{k-1}(x).
    """

    a: np.ndarray
    b: np.ndarray  # b[0] unused
    mass: float

    @property
    def degree(self) -> int:
        return self.a.size

    def evaluate(self, x, degree: int | None = None) -> np.ndarray:
        """Rows p_0(x), ..., p_degree(x) stacked along a new leading axis."""
        degree = self.degree if degree is None else degree
        x = np.asarray(x, dtype=float)
        out = np.empty((degree + 1,) + x.shape)
        out[0] = 1.0 / math.sqrt(self.mass)
        if degree >= 1:
            out[1] = (x - self.a[0]) * out[0] / self.b[1]
        for k in range(1, degree):
            out[k + 1] = ((x - self.a[k]) * out[k] - self.b[k] * out[k - 1]) / self.b[k + 1]
        return out

    def leading_coefficient(self, k: int) -> float:
        return 1.0 / (math.sqrt(self.mass) * float(np.prod(self.b[1:k + 1])))

    def monomial_coefficients(self, k: int) -> np.ndarray:
        """Ascending monomial coefficients of p_k (small k only)."""
        P = np.polynomial.Polynomial
        prev = P([0.0])
        cur = P([1.0 / math.sqrt(self.mass)])
        for j in range(k):
            nxt = ((P([-self.a[j], 1.0]) * cur) - self.b[j] * prev) / self.b[j + 1]
            prev, cur = cur, nxt
        return np.pad(cur.coef, (0, k + 1 - cur.coef.size))


def lanczos_recurrence(nodes: np.ndarray, weights: np.ndarray, degree: int) -> Recurrence:
    """Recurrence coefficients up to ``degree`` for the measure sum_q weights[q] delta_{nodes[q]}.

    Lanczos on diag(nodes) with full reorthogonalization.
    """
    if degree >= nodes.size:
        raise ValueError("degree must be smaller than the number of nodes")
    mass = float(np.sum(weights))
    if not mass > 0:
        raise ValueError("measure has no mass on the quadrature nodes")
    v = np.sqrt(weights / mass)
    basis = np.empty((degree + 1, nodes.size))
    basis[0] = v
    a = np.empty(degree)
    b = np.zeros(degree + 1)
    for k in range(degree):
        w = nodes * basis[k]
        a[k] = basis[k] @ w
        w -= a[k] * basis[k]
        if k:
            w -= b[k] * basis[k - 1]
        for _ in range(2):
            w -= basis[:k + 1].T @ (basis[:k + 1] @ w)
        b[k + 1] = np.linalg.norm(w)
        if b[k + 1] == 0.0:
            raise ValueError("discrete measure supports too few points for this degree")
        basis[k + 1] = w / b[k + 1]
    return Recurrence(a, b, mass)


# polynomial representation


@dataclass(frozen=True)
class PolynomialRep:
    """A polynomial sum_j coefficients[j] p_j(x) in an orthonormal reference basis."""

    coefficients: np.ndarray
    basis: Recurrence
    monic: bool = True

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    def __call__(self, x):
        vals = self.basis.evaluate(x, self.degree)
        return np.tensordot(self.coefficients, vals, axes=1)

    def to_monomial(self) -> np.ndarray:
        """Ascending monomial coefficients."""
        out = np.zeros(self.degree + 1)
        for j, c in enumerate(self.coefficients):
            out[:j + 1] += c * self.basis.monomial_coefficients(j)
        return out


# working interval and rule


def _decay_point(logg, start: float, direction: float, drop: float, floor: float | None = None) -> float:
    peak = float(logg(np.array([start]))[0])
    step = 0.5
    x = start
    while True:
        cand = x + direction * step
        if floor is not None and (cand - floor) * direction >= 0:
            return floor
        if float(logg(np.array([cand]))[0]) < peak - drop:
            break
        x = cand
        step *= 1.6
        if step > 1e4:
            raise ValueError("weight family does not decay")
    lo, hi = x, cand
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if float(logg(np.array([mid]))[0]) < peak - drop:
            hi = mid
        else:
            lo = mid
    return hi


def working_interval(fam: WeightFamily, nu, drop: float = 40.0) -> tuple[float, float]:
    """Interval outside of which the gauge has fallen by ``exp(-drop)`` from its peak."""
    nu = _as_multi_index(nu)
    lo_s, hi_s = fam.support
    if fam.kind is WeightKind.TABULATED:
        return lo_s, hi_s

    def logg(x):
        return log_gauge(fam, x)

    if math.isinf(lo_s):
        scan = np.linspace(-20.0, 20.0, 801)
    else:
        scan = np.linspace(lo_s, lo_s + 40.0, 801)[1:]
    vals = logg(scan)
    mode = float(scan[int(np.argmax(vals))])
    drop = drop + 2.0 * nu.total
    hi = _decay_point(logg, mode, 1.0, drop)
    lo = lo_s if not math.isinf(lo_s) else _decay_point(logg, mode, -1.0, drop)
    return lo, hi


def default_rule(fam: WeightFamily, nu, nodes: int | None = None) -> QuadratureRule:
    nu = _as_multi_index(nu)
    lo, hi = working_interval(fam, nu)
    m = nodes if nodes is not None else max(96, 4 * nu.total + 60)
    return gauss_legendre(m, lo, hi)


# shared basis assembly


@dataclass(frozen=True)
class _Bases:
    rule: QuadratureRule
    poly: Recurrence           # p_j, orthonormal for the reference measure
    poly_shift: float          # Phi_j = p_j sqrt(g) exp(-poly_shift)
    groups: tuple              # per-weight Recurrence for q_{k,i}
    group_shifts: tuple
    psi_r: np.ndarray          # R of the QR factorization of Psi on the nodes
    psi_condition: float


def _reference_measure(rule, basis, logg):
    x = rule.nodes
    if basis == "gauge":
        logm = logg
    elif basis == "legendre":
        logm = np.zeros_like(x)
    elif basis == "hermite":
        center = 0.5 * (rule.lo + rule.hi)
        scale = (rule.hi - rule.lo) / 6.0
        logm = -0.5 * ((x - center) / scale) ** 2
    else:
        raise ValueError(f"unknown basis {basis!r}")
    return rule.weights * np.exp(logm - np.max(logm))


def _build_bases(fam, nu, rule, poly_degree, basis) -> _Bases:
    x = rule.nodes
    logg = log_gauge(fam, x)
    poly = lanczos_recurrence(x, _reference_measure(rule, basis, logg), poly_degree)
    poly_shift = 0.5 * float(np.max(logg)) if basis == "gauge" else 0.0
    groups, shifts = [], []
    for k, nk in enumerate(nu):
        if nk == 0:
            groups.append(None)
            shifts.append(0.0)
            continue
        _, logw = fam.log_weight(k, x)
        logm = np.where(np.isfinite(logw), 2.0 * logw - logg, -np.inf)
        top = float(np.max(logm))
        groups.append(lanczos_recurrence(x, rule.weights * np.exp(logm - top), nk - 1))
        shifts.append(0.5 * top)
    partial = _Bases(rule, poly, poly_shift, tuple(groups), tuple(shifts), np.eye(0), 1.0)
    if nu.total == 0:
        return partial
    raw = _psi_raw(fam, nu, partial, x) * np.sqrt(rule.weights)
    r = np.linalg.qr(raw.T, mode="r")
    return _Bases(rule, poly, poly_shift, tuple(groups), tuple(shifts), r, float(np.linalg.cond(r)))


def _phi(fam, bases, x, degree):
    """Phi_j(x) = p_j(x) sqrt(g(x)) for j = 0..degree, shape (degree+1,) + x.shape."""
    half = np.exp(0.5 * log_gauge(fam, x) - bases.poly_shift)
    return bases.poly.evaluate(x, degree) * half


def _psi_raw(fam, nu, bases, x):
    # q_{k,i}(x) w_k(x) / sqrt(g(x)), stacked over (k, i) lexicographically
    x = np.asarray(x, dtype=float)
    logg = log_gauge(fam, x)
    rows = []
    for k, nk in enumerate(nu):
        if nk == 0:
            continue
        sign, logw = fam.log_weight(k, x)
        with np.errstate(invalid="ignore"):
            factor = sign * np.exp(logw - 0.5 * logg - bases.group_shifts[k])
        factor = np.where(np.isfinite(factor), factor, 0.0)
        rows.append(bases.groups[k].evaluate(x, nk - 1) * factor)
    return np.concatenate(rows, axis=0)


def _psi(fam, nu, bases, x):
    """Psi basis orthonormalized jointly over all weights on the quadrature nodes."""
    raw = _psi_raw(fam, nu, bases, x)
    flat = raw.reshape(raw.shape[0], -1)
    out = solve_triangular(bases.psi_r, flat, trans="T")
    return out.reshape(raw.shape)


def _gram(fam, nu, bases, poly_degree):
    x = bases.rule.nodes
    phi = _phi(fam, bases, x, poly_degree)
    psi = _psi(fam, nu, bases, x)
    return (phi * bases.rule.weights) @ psi.T, phi, psi


def gram_condition(G: np.ndarray) -> float:
    return float(np.linalg.cond(G)) if G.size else 1.0


# MOPs


def compute_mop(fam: WeightFamily, nu, rule: QuadratureRule | None = None, basis: str = "gauge") -> PolynomialRep:
    """The monic type II multiple orthogonal polynomial of degree |nu|."""
    nu = _as_multi_index(nu)
    if nu.r != fam.r:
        raise ValueError(f"multi-index has {nu.r} entries for {fam.r} weights")
    N = nu.total
    rule = rule if rule is not None else default_rule(fam, nu)
    bases = _build_bases(fam, nu, rule, max(N, 1), basis)
    lead = bases.poly.leading_coefficient(N)
    coeffs = np.zeros(N + 1)
    coeffs[N] = 1.0 / lead
    if N == 0:
        return PolynomialRep(coeffs, bases.poly)
    G, _, _ = _gram(fam, nu, bases, N)
    top, last = G[:N], G[N]
    cond = gram_condition(top)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise NonUniqueMOP(f"moment system is singular (condition {cond:.3e}); the MOP may not be unique")
    coeffs[:N] = np.linalg.solve(top.T, -last) / lead
    return PolynomialRep(coeffs, bases.poly)


def mop_condition(fam: WeightFamily, nu, rule: QuadratureRule | None = None) -> float:
    """Condition number of the moment system solved by :func:`compute_mop`."""
    nu = _as_multi_index(nu)
    N = nu.total
    if N == 0:
        return 1.0
    rule = rule if rule is not None else default_rule(fam, nu)
    bases = _build_bases(fam, nu, rule, N, "gauge")
    G, _, _ = _gram(fam, nu, bases, N)
    return gram_condition(G[:N])


def mop_residuals(P: PolynomialRep, fam: WeightFamily, nu, rule: QuadratureRule) -> np.ndarray:
    """Normalized orthogonality integrals int P x^j w_k dx, ordered by (k, j).

    Each integral is divided by sqrt(int P^2 |w_k| dx * int x^{2j} |w_k| dx),
    so residuals lie in [-1, 1] and vanish exactly for the MOP.
    """
    nu = _as_multi_index(nu)
    x = rule.nodes
    px = P(x)
    out = []
    for k, nk in enumerate(nu):
        if nk == 0:
            continue
        sign, logw = fam.log_weight(k, x)
        finite = np.isfinite(logw)
        scale = np.max(logw[finite])
        w = np.where(finite, sign * np.exp(np.where(finite, logw, 0.0) - scale), 0.0)
        norm_p = math.sqrt(np.dot(rule.weights, px * px * np.abs(w)))
        for j in range(nk):
            xj = x ** j
            num = np.dot(rule.weights, px * xj * w)
            den = norm_p * math.sqrt(np.dot(rule.weights, xj * xj * np.abs(w)))
            out.append(num / den if den > 0 else 0.0)
    return np.array(out)


# kernel


@dataclass(frozen=True)
class KernelEvaluator:
    """Finite-n correlation kernel K_n of a MOP ensemble."""

    family: WeightFamily
    nu: MultiIndex
    rule: QuadratureRule
    bases: _Bases
    coupling: np.ndarray   # (G^T)^{-1}
    condition: float

    @property
    def n(self) -> int:
        return self.nu.total

    @property
    def interval(self) -> tuple[float, float]:
        return self.rule.interval

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.interval
        if x.size and (np.any(x < lo) or np.any(x > hi)):
            raise OutOfRange(f"kernel evaluated outside working interval [{lo}, {hi}]")
        return x

    def phi(self, x):
        return _phi(self.family, self.bases, self._check(x), self.n - 1)

    def psi(self, x):
        return _psi(self.family, self.nu, self.bases, self._check(x))

    def __call__(self, x, y):
        """K_n(x, y) with numpy broadcasting between x and y."""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        phx = self.phi(x)
        psy = self.psi(y)
        left = np.tensordot(self.coupling.T, phx, axes=1)
        return np.sum(left * psy, axis=0)

    def matrix(self, x, y=None):
        """Kernel matrix [K(x_i, y_j)]."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = x if y is None else np.atleast_1d(np.asarray(y, dtype=float))
        return self.phi(x).T @ self.coupling @ self.psi(y)

    def diagonal(self, x):
        x = np.asarray(x, dtype=float)
        return self(x, x)

    def trace(self, rule: QuadratureRule | None = None) -> float:
        rule = rule if rule is not None else self.rule
        return float(np.dot(rule.weights, self.diagonal(rule.nodes)))


def build_kernel(fam: WeightFamily, nu, rule: QuadratureRule | None = None, basis: str = "gauge",
                 check_tails: bool = True) -> KernelEvaluator:
    """Correlation kernel of the MOP ensemble with weights ``fam`` and multi-index ``nu``.

    Without an explicit rule the working interval is chosen from the decay
    of the weights and widened until the kernel diagonal at both ends is
    below 1e-14 of its peak.
    """
    nu = _as_multi_index(nu)
    if nu.r != fam.r:
        raise ValueError(f"multi-index has {nu.r} entries for {fam.r} weights")
    if nu.total < 1:
        raise ValueError("kernel needs |nu| >= 1")
    explicit = rule is not None
    if not explicit:
        rule = default_rule(fam, nu)
    for _ in range(6):
        K = _assemble(fam, nu, rule, basis)
        if explicit or not check_tails or _tails_ok(K):
            return K
        rule = _widen(fam, rule)
    return K


def _assemble(fam, nu, rule, basis):
    n = nu.total
    bases = _build_bases(fam, nu, rule, n - 1, basis)
    G, _, _ = _gram(fam, nu, bases, n - 1)
    cond = gram_condition(G)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularGram(f"Gram matrix is singular (condition {cond:.3e})")
    coupling = np.linalg.inv(G.T)
    return KernelEvaluator(fam, nu, rule, bases, coupling, cond)


def _tails_ok(K):
    x = K.rule.nodes
    diag = np.abs(K.diagonal(x))
    peak = np.max(diag)
    lo, hi = K.interval
    lo_s, _ = K.family.support
    ends = [hi] if lo == lo_s else [lo, hi]
    return all(abs(float(K.diagonal(np.array([e]))[0])) <= TAIL_TOLERANCE * peak for e in ends)


def _widen(fam, rule):
    lo, hi = rule.interval
    lo_s, hi_s = fam.support
    mid = 0.5 * (lo + hi)
    half = 0.625 * (hi - lo)
    new_lo = max(lo_s, mid - half) if lo != lo_s else lo
    new_hi = min(hi_s, mid + half)
    m = int(math.ceil(len(rule) * 1.25))
    return gauss_legendre(m, new_lo, new_hi)


def eval_kernel(K: KernelEvaluator, x: float, y: float) -> float:
    return float(K(x, y))


def mean_density(K: KernelEvaluator, x):
    """(1/n) K_n(x, x)."""
    value = K.diagonal(x) / K.n
    return float(value) if np.ndim(value) == 0 else value


def correlation(K: KernelEvaluator, points: Sequence[float]) -> float:
    """m-point correlation function det[K(x_i, x_j)]."""
    pts = np.asarray(points, dtype=float)
    return float(np.linalg.det(K.matrix(pts)))
