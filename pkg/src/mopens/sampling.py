"""Seeded samplers for GUE, GUE with external source, and non-intersecting
Brownian bridges, plus empirical spectral statistics.

Each spectral sample draws from its own Philox substream keyed by
(seed, batch, index), so results do not depend on scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .limits import tracy_widom_cdf
from .numerics.eigen import hermitian_eigenvalues
from .weights import WeightFamily

MIN_TW_SAMPLES = 200
WEIGHT_MATCH_TOL = 1e-12


class OddSize(ValueError):
    pass


class TimeOutOfRange(ValueError):
    pass


class EmptyInput(ValueError):
    pass


class InsufficientSamples(ValueError):
    pass


# random streams


def substream(seed: int, batch: int = 0, index: int = 0) -> np.random.Generator:
    """Counter-based generator for sample ``index`` of ``batch``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, batch, index))))


def polar_normals(rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard normal draws by the Marsaglia polar method."""
    out = np.empty(size)
    filled = 0
    while filled < size:
        need = size - filled
        # acceptance rate is pi/4; oversample to finish in one round usually
        m = need // 2 + 8 + need // 4
        u = rng.uniform(-1.0, 1.0, size=(m, 2))
        s = np.sum(u * u, axis=1)
        ok = (s > 0.0) & (s < 1.0)
        u, s = u[ok], s[ok]
        z = (u * np.sqrt(-2.0 * np.log(s) / s)[:, None]).ravel()
        take = min(need, z.size)
        out[filled:filled + take] = z[:take]
        filled += take
    return out


# samples


@dataclass(frozen=True)
class SpectralSample:
    ensemble: dict
    n: int
    seed: int
    eigenvalues: np.ndarray
    batch: int = 0
    index: int = 0


def gue_matrix(n: int, rng: np.random.Generator) -> np.ndarray:
    """H with density proportional to exp(-n Tr H^2 / 2)."""
    g = polar_normals(rng, n * n)
    h = np.zeros((n, n), dtype=complex)
    h[np.diag_indices(n)] = g[:n] / math.sqrt(n)
    iu = np.triu_indices(n, 1)
    k = iu[0].size
    off = (g[n:n + k] + 1j * g[n + k:n + 2 * k]) / math.sqrt(2.0 * n)
    h[iu] = off
    h[(iu[1], iu[0])] = off.conj()
    return h


def _check_n(n):
    if int(n) != n or n < 1:
        raise ValueError("matrix size n must be a positive integer")


def sample_gue(n: int, seed: int, batch: int = 0, index: int = 0) -> SpectralSample:
    _check_n(n)
    h = gue_matrix(n, substream(seed, batch, index))
    return SpectralSample({"ensemble": "gue"}, n, seed, hermitian_eigenvalues(h, check=False), batch, index)


def source_matrix(n: int, a: float) -> np.ndarray:
    """diag(a, ..., a, -a, ..., -a) with n/2 entries of each sign."""
    if n % 2:
        raise OddSize("external source needs even n")
    return np.concatenate([np.full(n // 2, float(a)), np.full(n // 2, -float(a))])


def sample_source(n: int, a: float, seed: int, batch: int = 0, index: int = 0) -> SpectralSample:
    """Eigenvalues of A + H; exp(-n Tr(M^2/2 - A M)) is proportional to exp(-n Tr (M - A)^2 / 2)."""
    _check_n(n)
    if a < 0:
        raise ValueError("source strength a must be nonnegative")
    diag = source_matrix(n, a)
    h = gue_matrix(n, substream(seed, batch, index))
    h[np.diag_indices(n)] += diag
    return SpectralSample({"ensemble": "source", "a": float(a)}, n, seed,
                          hermitian_eigenvalues(h, check=False), batch, index)


def nibm_map(t: float, a: float) -> tuple[float, float]:
    """(scale, alpha) with positions x = scale * y, y an external-source eigenvalue for +-alpha.

    Bridges start at +-a at time 0, end at 0 at time 1, with transition
    variance 1/n per unit time.  Matching
    n(-x^2 / (2 t (1 - t)) +- a x / t) at x = s y against n(-y^2/2 +- alpha y)
    gives s^2 = t (1 - t) and alpha = a s / t.
    """
    if not 0.0 < t < 1.0:
        raise TimeOutOfRange("time must lie in (0, 1)")
    s = math.sqrt(t * (1.0 - t))
    return s, a * s / t


def check_nibm_map(n: int, t: float, a: float, points: np.ndarray | None = None) -> float:
    """Largest relative mismatch of the two log-weights under the affine map."""
    s, alpha = nibm_map(t, a)
    y = np.linspace(-4.0, 4.0, 33) if points is None else np.asarray(points, dtype=float)
    bridge = WeightFamily.multiple_hermite((a, -a), t, 1.0, n)
    source = WeightFamily.external_source((0.0, 0.0, 0.5), (alpha, -alpha), n)
    worst = 0.0
    for j in range(2):
        lb = bridge.log_weight(j, s * y)[1]
        ls = source.log_weight(j, y)[1]
        worst = max(worst, float(np.max(np.abs(lb - ls) / (1.0 + np.abs(ls)))))
    return worst


def sample_nibm_positions(n: int, t: float, a: float, seed: int, batch: int = 0, index: int = 0) -> SpectralSample:
    """Positions at time t of n non-intersecting Brownian bridges, n/2 from each of +-a to 0."""
    s, alpha = nibm_map(t, a)
    mismatch = check_nibm_map(n, t, a)
    if mismatch > WEIGHT_MATCH_TOL:
        raise ArithmeticError(f"bridge and source weights disagree by {mismatch:.2e}")
    y = sample_source(n, alpha, seed, batch, index).eigenvalues
    desc = {"ensemble": "nibm", "t": float(t), "a": float(a), "scale": s, "alpha": alpha}
    return SpectralSample(desc, n, seed, s * y, batch, index)


_SAMPLERS = {
    "gue": lambda n, seed, b, i, **kw: sample_gue(n, seed, b, i),
    "source": lambda n, seed, b, i, a=0.0, **kw: sample_source(n, a, seed, b, i),
    "nibm": lambda n, seed, b, i, t=0.5, a=0.0, **kw: sample_nibm_positions(n, t, a, seed, b, i),
}


def _run_batch(args):
    ensemble, n, seed, batch, size, params = args
    fn = _SAMPLERS[ensemble]
    return [fn(n, seed, batch, i, **params) for i in range(size)]


def sample_batches(ensemble: str, n: int, seed: int, batches: int, batch_size: int = 1,
                   workers: int = 1, **params) -> list[SpectralSample]:
    """All samples (batch, index) in lexicographic order; ``workers`` only changes speed."""
    if ensemble not in _SAMPLERS:
        raise ValueError(f"unknown ensemble {ensemble!r}")
    _check_n(n)
    jobs = [(ensemble, n, seed, b, batch_size, params) for b in range(batches)]
    if workers > 1 and batches > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_batch, jobs))
    else:
        chunks = [_run_batch(j) for j in jobs]
    return [s for chunk in chunks for s in chunk]


# statistics


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    mode: str = "density"
    total: int = 0          # number of values inside the edges
    outside: int = 0

    def __post_init__(self):
        if self.mode not in ("density", "counts"):
            raise ValueError("mode must be 'density' or 'counts'")

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def values(self) -> np.ndarray:
        if self.mode == "counts":
            return self.counts.astype(float)
        return self.counts / (self.total * self.widths) if self.total else np.zeros(self.counts.size)


def empirical_density(samples: Sequence[SpectralSample], edges, mode: str = "density") -> Histogram:
    """Histogram of all eigenvalues pooled over samples."""
    if not samples:
        raise EmptyInput("need at least one sample")
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("edges must be strictly increasing")
    values = np.concatenate([s.eigenvalues for s in samples])
    counts, _ = np.histogram(values, edges)
    inside = int(counts.sum())
    return Histogram(edges, counts, mode, inside, values.size - inside)


@dataclass(frozen=True)
class EmpiricalCDF:
    values: np.ndarray        # sorted scaled maxima
    levels: np.ndarray        # (k + 1) / count
    ks_distance: float
    scaling: dict = field(default_factory=dict)

    def __call__(self, t):
        return np.searchsorted(self.values, np.asarray(t, dtype=float), side="right") / self.values.size


def _tw(t, m):
    if t < -10.0:
        return 0.0
    return tracy_widom_cdf(float(t), m)


def largest_eigenvalue_cdf(samples: Sequence[SpectralSample], center: float = 2.0,
                           exponent: float = 2.0 / 3.0, c: float = 1.0, m: int = 40,
                           reference=None) -> EmpiricalCDF:
    """Empirical CDF of c n^{exponent} (lambda_max - center) with its
    Kolmogorov-Smirnov distance to ``reference`` (Tracy-Widom by default)."""
    if len(samples) < MIN_TW_SAMPLES:
        raise InsufficientSamples(f"need at least {MIN_TW_SAMPLES} samples")
    n = samples[0].n
    scaled = np.sort([c * n ** exponent * (s.eigenvalues[-1] - center) for s in samples])
    k = scaled.size
    levels = np.arange(1, k + 1) / k
    ref = reference if reference is not None else (lambda t: _tw(t, m))
    F = np.array([ref(v) for v in scaled])
    ks = float(max(np.max(np.abs(levels - F)), np.max(np.abs(levels - 1.0 / k - F))))
    return EmpiricalCDF(scaled, levels, ks, {"center": center, "exponent": exponent, "c": c})
