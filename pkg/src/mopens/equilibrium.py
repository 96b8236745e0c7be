"""Discretized (vector) equilibrium problems of logarithmic potential theory.

Every measure is piecewise constant on equispaced cells of a real or
imaginary grid and is stored as a vector of cell masses.  The energy is

    E(m) = sum_{a,b} C_ab m_a^T L_ab m_b + sum_a f_a . m_a,

with L_ab[i, j] = -log|z_{a,i} - z_{b,j}|, the exact self-energy
-(log h - 3/2) of a uniform cell of width h on the diagonal, C the
interaction matrix and f_a the cell averages of the external field.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.sparse.linalg import eigsh

from .weights import _poly, check_even_confining

MASS_TOL = 1e-12
BOUNDARY_MASS = 1e-6


class InfeasibleMasses(ValueError):
    pass


class NonConfiningPotential(ValueError):
    pass


class TruncationWarning(UserWarning):
    pass


class MaxItersExceeded(RuntimeWarning):
    pass


class Axis(str, Enum):
    REAL = "real"
    IMAGINARY = "imaginary"


@dataclass(frozen=True)
class Grid:
    """Equispaced cells on [lo, hi]; 0 must be a cell boundary or outside the grid."""

    lo: float
    hi: float
    cells: int

    def __post_init__(self):
        if not self.hi > self.lo or self.cells < 1:
            raise ValueError("grid needs lo < hi and at least one cell")
        if self.lo < 0 < self.hi:
            k = -self.lo / self.width
            if abs(k - round(k)) > 1e-9:
                raise ValueError("0 must fall on a cell boundary")

    @classmethod
    def symmetric(cls, half_width: float, cells: int):
        if cells % 2:
            raise ValueError("a symmetric grid needs an even number of cells")
        return cls(-half_width, half_width, cells)

    @property
    def width(self) -> float:
        return (self.hi - self.lo) / self.cells

    @property
    def edges(self) -> np.ndarray:
        e = self.lo + self.width * np.arange(self.cells + 1)
        if self.lo == -self.hi:
            e = 0.5 * (e - e[::-1])
        if self.lo < 0 < self.hi:
            e[int(round(-self.lo / self.width))] = 0.0
        return e

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[:-1] + e[1:])


@dataclass(frozen=True)
class DiscreteMeasure:
    """Cell masses of one measure; ``cap`` holds per-cell upper bounds or None."""

    axis: Axis
    grid: Grid
    masses: np.ndarray
    total: float
    cap: np.ndarray | None = None

    @property
    def centers(self) -> np.ndarray:
        return self.grid.centers

    @property
    def width(self) -> float:
        return self.grid.width

    @property
    def points(self) -> np.ndarray:
        """Cell centers as complex numbers."""
        c = self.centers
        return c.astype(complex) if self.axis is Axis.REAL else 1j * c

    @property
    def density(self) -> np.ndarray:
        return self.masses / self.width

    def cap_active(self, rtol: float = 1e-8) -> np.ndarray:
        if self.cap is None:
            return np.zeros(self.masses.size, dtype=bool)
        return self.masses >= self.cap * (1.0 - rtol)

    def with_masses(self, masses) -> "DiscreteMeasure":
        return replace(self, masses=np.asarray(masses, dtype=float))


def _check_interaction(C: np.ndarray) -> np.ndarray:
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1] or not np.allclose(C, C.T):
        raise ValueError("interaction matrix must be square and symmetric")
    if np.min(np.linalg.eigvalsh(C)) <= 0:
        raise ValueError("interaction matrix must be positive definite")
    return C


def chain_interaction(size: int) -> np.ndarray:
    """Diagonal 1, consecutive couplings -1/2."""
    return np.eye(size) - 0.5 * (np.eye(size, k=1) + np.eye(size, k=-1))


def _log_block(ma: DiscreteMeasure, mb: DiscreteMeasure, same: bool) -> np.ndarray:
    d = np.abs(ma.points[:, None] - mb.points[None, :])
    self_energy = -(math.log(ma.width) - 1.5)
    if same:
        np.fill_diagonal(d, 1.0)
        out = -np.log(d)
        np.fill_diagonal(out, self_energy)
        return out
    coincide = d == 0.0
    if np.any(coincide):
        if ma.width != mb.width:
            raise ValueError("coincident cells of different widths")
        d = np.where(coincide, 1.0, d)
        return np.where(coincide, self_energy, -np.log(d))
    return -np.log(d)


@dataclass(frozen=True)
class EquilibriumProblem:
    measures: tuple[DiscreteMeasure, ...]
    interaction: np.ndarray
    fields: tuple[np.ndarray, ...]
    name: str = "equilibrium"

    def __post_init__(self):
        C = _check_interaction(self.interaction)
        object.__setattr__(self, "interaction", C)
        if C.shape[0] != len(self.measures) or len(self.fields) != len(self.measures):
            raise ValueError("need one interaction row and one field per measure")
        for mu, f in zip(self.measures, self.fields):
            if f.shape != mu.masses.shape:
                raise ValueError("field must have one entry per cell")
            if mu.cap is not None and np.sum(mu.cap) < mu.total * (1 + 1e-12):
                raise InfeasibleMasses("caps cannot hold the required mass")

    @property
    def sizes(self) -> list[int]:
        return [mu.masses.size for mu in self.measures]

    @cached_property
    def _offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.sizes)])

    @cached_property
    def quadratic(self) -> np.ndarray:
        """Symmetric matrix Q with E(m) = m^T Q m + f . m for the stacked masses."""
        n = self._offsets[-1]
        Q = np.zeros((n, n))
        o = self._offsets
        C = self.interaction
        for a, ma in enumerate(self.measures):
            for b in range(a, len(self.measures)):
                if C[a, b] == 0.0:
                    continue
                block = C[a, b] * _log_block(ma, self.measures[b], a == b)
                Q[o[a]:o[a + 1], o[b]:o[b + 1]] = block
                if a != b:
                    Q[o[b]:o[b + 1], o[a]:o[a + 1]] = block.T
        return Q

    @cached_property
    def field_vector(self) -> np.ndarray:
        return np.concatenate(self.fields)

    @cached_property
    def caps(self) -> list:
        return [mu.cap for mu in self.measures]

    @cached_property
    def lipschitz(self) -> float:
        """Largest eigenvalue of the Hessian 2Q."""
        Q = self.quadratic
        if Q.shape[0] <= 64:
            return 2.0 * float(np.max(np.abs(np.linalg.eigvalsh(Q))))
        # fixed start vector keeps the step sizes, hence the iterates, reproducible
        top = eigsh(Q, k=1, which="LM", return_eigenvectors=False, tol=1e-6, v0=np.ones(Q.shape[0]))
        return 2.0 * 1.001 * float(abs(top[0]))

    def stack(self, masses: Sequence[np.ndarray]) -> np.ndarray:
        return np.concatenate([np.asarray(m, dtype=float) for m in masses])

    def split(self, m: np.ndarray) -> list[np.ndarray]:
        o = self._offsets
        return [m[o[a]:o[a + 1]] for a in range(len(self.measures))]

    def project(self, v: np.ndarray) -> np.ndarray:
        """Euclidean projection onto {0 <= m_a <= cap_a, sum m_a = total_a}."""
        return np.concatenate([
            project_capped_simplex(block, mu.total, mu.cap)
            for block, mu in zip(self.split(v), self.measures)
        ])

    def initial(self) -> np.ndarray:
        """Uniform masses, projected onto the caps (symmetric for symmetric grids)."""
        return self.project(self.stack(
            [np.full(mu.masses.size, mu.total / mu.masses.size) for mu in self.measures]))


# projection


def project_capped_simplex(v: np.ndarray, total: float, cap: np.ndarray | None = None) -> np.ndarray:
    """argmin ||m - v|| subject to 0 <= m <= cap and sum m = total.

    The solution is clip(v - lam, 0, cap); lam is located by bisection over
    the sorted breakpoints of the piecewise-linear, nonincreasing function
    S(lam) = sum clip(v - lam, 0, cap), then solved exactly on its segment.
    """
    v = np.asarray(v, dtype=float)
    upper = np.full_like(v, np.inf) if cap is None else np.asarray(cap, dtype=float)
    if np.sum(upper) < total:
        raise InfeasibleMasses("caps cannot hold the required mass")

    def S(lam):
        return float(np.sum(np.clip(v - lam, 0.0, upper)))

    bps = np.unique(np.concatenate([v, (v - upper)[np.isfinite(upper)]]))
    if S(bps[0]) < total:
        # below every breakpoint only uncapped cells are free
        free = ~np.isfinite(upper)
        lam = (np.sum(v[free]) + np.sum(upper[~free]) - total) / np.count_nonzero(free)
        return np.clip(v - lam, 0.0, upper)
    lo, hi = 0, bps.size - 1      # S(bps[lo]) >= total > S(bps[hi]) = 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if S(bps[mid]) >= total:
            lo = mid
        else:
            hi = mid
    a, b = bps[lo], bps[hi]
    sa, sb = S(a), S(b)
    lam = a if sa == sb else a + (sa - total) * (b - a) / (sa - sb)
    return np.clip(v - lam, 0.0, upper)


# problem constructors


def _poly_cell_average(coeffs, edges):
    anti = np.polynomial.polynomial.polyint(np.asarray(coeffs, dtype=float))
    vals = _poly(anti, edges)
    return np.diff(vals) / np.diff(edges)


def _power_abs_cell_average(power, edges):
    """Cell averages of |x|^power for cells not straddling 0."""
    anti = np.sign(edges) * np.abs(edges) ** (power + 1) / (power + 1)
    return np.diff(anti) / np.diff(edges)


def _check_even(V):
    c = np.asarray(V, dtype=float)
    if np.any(c[1::2] != 0.0):
        raise NonConfiningPotential("potential must be even")


def _confining(V):
    try:
        check_even_confining(V)
    except ValueError as exc:
        raise NonConfiningPotential(str(exc)) from None


def _measure(axis, grid, total, cap=None):
    return DiscreteMeasure(axis, grid, np.full(grid.cells, total / grid.cells), total, cap)


def make_single_ep(V: Sequence[float], grid: Grid = Grid(-2.5, 2.5, 400)) -> EquilibriumProblem:
    """One probability measure on the real line in the external field V."""
    _confining(V)
    mu = _measure(Axis.REAL, grid, 1.0)
    return EquilibriumProblem((mu,), np.eye(1), (_poly_cell_average(V, grid.edges),), "single")


def make_source_ep(V: Sequence[float], a: float, grid: Grid = Grid(-5.0, 5.0, 400),
                   imag_grid: Grid | None = None) -> EquilibriumProblem:
    """mu_1 on R (mass 1, field V(x) - a|x|) and mu_2 on iR (mass 1/2, density cap a/pi)."""
    _confining(V)
    _check_even(V)
    if not a > 0:
        raise ValueError("source strength a must be positive")
    imag_grid = imag_grid if imag_grid is not None else Grid.symmetric(40.0, 1600)
    e = grid.edges
    field1 = _poly_cell_average(V, e) - a * _power_abs_cell_average(1.0, e)
    cap = np.full(imag_grid.cells, a / math.pi * imag_grid.width)
    mu1 = _measure(Axis.REAL, grid, 1.0)
    mu2 = _measure(Axis.IMAGINARY, imag_grid, 0.5, cap)
    return EquilibriumProblem((mu1, mu2), chain_interaction(2),
                              (field1, np.zeros(imag_grid.cells)), "source")


def twomatrix_cap(tau: float, grid: Grid) -> np.ndarray:
    """Cell integrals of sqrt(3)/(2 pi) |tau|^{4/3} |z|^{1/3} on the imaginary grid."""
    e = grid.edges
    anti = np.sign(e) * 0.75 * np.abs(e) ** (4.0 / 3.0)
    return math.sqrt(3.0) / (2.0 * math.pi) * abs(tau) ** (4.0 / 3.0) * np.diff(anti)


def make_twomatrix_ep(V: Sequence[float], tau: float, grid: Grid = Grid(-4.0, 4.0, 320),
                      imag_grid: Grid | None = None, third_grid: Grid | None = None) -> EquilibriumProblem:
    """mu_1 on R (mass 1), mu_2 on iR (mass 2/3, capped), mu_3 on R (mass 1/3)."""
    _confining(V)
    _check_even(V)
    if tau == 0:
        raise ValueError("coupling tau must be nonzero")
    imag_grid = imag_grid if imag_grid is not None else Grid.symmetric(24.0, 960)
    third_grid = third_grid if third_grid is not None else Grid.symmetric(24.0, 960)
    e = grid.edges
    field1 = _poly_cell_average(V, e) - 0.75 * abs(tau) ** (4.0 / 3.0) * _power_abs_cell_average(4.0 / 3.0, e)
    mu1 = _measure(Axis.REAL, grid, 1.0)
    mu2 = _measure(Axis.IMAGINARY, imag_grid, 2.0 / 3.0, twomatrix_cap(tau, imag_grid))
    mu3 = _measure(Axis.REAL, third_grid, 1.0 / 3.0)
    return EquilibriumProblem((mu1, mu2, mu3), chain_interaction(3),
                              (field1, np.zeros(imag_grid.cells), np.zeros(third_grid.cells)), "twomatrix")


# energy and minimization


def _check_feasible(problem: EquilibriumProblem, m: np.ndarray, tol: float = 1e-9):
    for block, mu in zip(problem.split(m), problem.measures):
        if np.any(block < -tol) or abs(np.sum(block) - mu.total) > tol:
            raise InfeasibleMasses("masses are negative or miss the mass target")
        if mu.cap is not None and np.any(block > mu.cap + tol):
            raise InfeasibleMasses("masses exceed the cap")


def energy(problem: EquilibriumProblem, masses) -> float:
    """Discrete energy of stacked masses or a list of per-measure mass vectors."""
    m = masses if isinstance(masses, np.ndarray) and masses.ndim == 1 \
        and masses.size == sum(problem.sizes) else problem.stack(masses)
    _check_feasible(problem, m)
    return float(m @ problem.quadratic @ m + problem.field_vector @ m)


@dataclass
class EquilibriumResult:
    problem: EquilibriumProblem
    measures: list[DiscreteMeasure]
    energy: float
    iterations: int
    stationarity: float
    converged: bool
    energies: list[float] = field(default_factory=list)
    max_mass_error: float = 0.0

    @property
    def max_iters_exceeded(self) -> bool:
        return not self.converged

    def diagnostics(self) -> dict:
        return {
            "problem": self.problem.name,
            "iterations": self.iterations,
            "final_energy": self.energy,
            "stationarity": self.stationarity,
            "converged": self.converged,
            "max_mass_error": self.max_mass_error,
        }


def stationarity(problem: EquilibriumProblem, m: np.ndarray, grad: np.ndarray | None = None) -> float:
    """||m - P(m - grad / L)||_inf with L the Lipschitz constant of the gradient."""
    if grad is None:
        grad = 2.0 * problem.quadratic @ m + problem.field_vector
    return float(np.max(np.abs(m - problem.project(m - grad / problem.lipschitz))))


def minimize(problem: EquilibriumProblem, max_iters: int = 5000, tol: float = 1e-9,
             start: np.ndarray | None = None) -> EquilibriumResult:
    """Monotone projected gradient with Barzilai-Borwein trial steps and
    Armijo backtracking.

    Stops when the projected-gradient residual drops below ``tol``; if
    ``max_iters`` is reached first the best iterate is returned with
    ``converged=False``.
    """
    Q, f = problem.quadratic, problem.field_vector
    lip = problem.lipschitz
    m = problem.initial() if start is None else problem.project(np.asarray(start, dtype=float))
    Qm = Q @ m
    E = float(m @ Qm + f @ m)
    grad = 2.0 * Qm + f
    step = 1.0 / lip
    energies = [E]
    mass_err = _mass_error(problem, m)
    res = stationarity(problem, m, grad)
    it = 0
    while res >= tol and it < max_iters:
        it += 1
        while True:
            trial = problem.project(m - step * grad)
            d = trial - m
            Qd = Q @ d
            gd = float(grad @ d)
            dQd = float(d @ Qd)
            if gd + dQd <= 1e-4 * gd or step <= 1.0 / lip:
                break
            step = max(0.5 * step, 1.0 / lip)
        if gd + dQd > 0.0:
            # only rounding noise remains
            break
        m = trial
        Qm = Qm + Qd
        E_new = float(m @ Qm + f @ m)
        E = min(E, E_new) if E_new <= E + 1e-15 * abs(E) else E_new
        energies.append(E)
        grad = 2.0 * Qm + f
        mass_err = max(mass_err, _mass_error(problem, m))
        sy = 2.0 * dQd
        step = float(d @ d) / sy if sy > 0 else 1e6 / lip
        step = min(max(step, 1.0 / lip), 1e6 / lip)
        res = stationarity(problem, m, grad)
    converged = res < tol
    if not converged:
        warnings.warn(f"{problem.name}: stopped after {it} iterations with residual {res:.2e}",
                      MaxItersExceeded, stacklevel=2)
    measures = [mu.with_masses(block) for mu, block in zip(problem.measures, problem.split(m))]
    _warn_truncation(problem, measures)
    return EquilibriumResult(problem, measures, float(m @ (Q @ m) + f @ m), it, res, converged,
                             energies, mass_err)


def _mass_error(problem, m):
    return max(abs(float(np.sum(b)) - mu.total) for b, mu in zip(problem.split(m), problem.measures))


def _warn_truncation(problem, measures):
    for k, mu in enumerate(measures):
        edge = max(mu.masses[0], mu.masses[-1])
        if edge > BOUNDARY_MASS and not mu.cap_active()[[0, -1]].all():
            warnings.warn(f"{problem.name}: measure {k + 1} carries {edge:.1e} mass in a boundary cell; "
                          "the grid may truncate its support", TruncationWarning, stacklevel=3)


def support_gap(mu: DiscreteMeasure, threshold: float = 1e-3) -> list[tuple[float, float]]:
    """Maximal runs of consecutive cells with density <= threshold * peak density,
    returned as (left edge, right edge) intervals."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    dens = mu.density
    low = dens <= threshold * np.max(dens, initial=0.0)
    edges = mu.grid.edges
    out = []
    i = 0
    while i < low.size:
        if low[i]:
            j = i
            while j + 1 < low.size and low[j + 1]:
                j += 1
            out.append((float(edges[i]), float(edges[j + 1])))
            i = j + 1
        else:
            i += 1
    return out


def symmetry_defect(mu: DiscreteMeasure) -> float:
    """max |m_i - m_{N-1-i}| for a grid symmetric about 0."""
    return float(np.max(np.abs(mu.masses - mu.masses[::-1])))


def active_interval(mu: DiscreteMeasure) -> tuple[float, float] | None:
    """Hull of the cells where the cap is attained, or None."""
    act = mu.cap_active()
    if not np.any(act):
        return None
    idx = np.flatnonzero(act)
    e = mu.grid.edges
    return float(e[idx[0]]), float(e[idx[-1] + 1])
