import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mopens.limits import (
    ContourTruncationError,
    PearceyParams,
    airy_kernel,
    pearcey_kernel_int,
    pearcey_kernel_ode,
    pearcey_ode_residuals,
    pearcey_p,
    pearcey_pq,
    pearcey_q,
    sine_kernel,
    tracy_widom_cdf,
)
from mopens.mop import build_kernel
from mopens.numerics import OutOfRange, airy_ai
from mopens.weights import WeightFamily


# sine

def test_sine_examples():
    assert sine_kernel(0.3, 0.3) == 1.0
    assert abs(sine_kernel(0.0, 1.0)) < 1e-16
    assert sine_kernel(0.0, 0.5) == pytest.approx(2 / math.pi, rel=1e-15)


@given(x=st.floats(-50, 50), y=st.floats(-50, 50))
def test_sine_symmetric_bounded(x, y):
    assert sine_kernel(x, y) == sine_kernel(y, x)
    assert abs(sine_kernel(x, y)) <= 1.0


# Airy

def test_airy_kernel_examples():
    assert airy_kernel(1.0, 2.0) == pytest.approx(airy_kernel(2.0, 1.0), rel=1e-14)
    assert airy_kernel(0.0, 0.0) == pytest.approx(airy_ai(0.0)[1] ** 2, rel=1e-14)
    assert abs(airy_kernel(0.0, 0.0) - 0.066987) < 1e-6


@pytest.mark.parametrize("x", [-6.0, -1.0, 0.0, 0.7, 3.0])
def test_airy_kernel_near_diagonal(x):
    ai, aip = airy_ai(x)
    diag = aip ** 2 - x * ai ** 2
    assert abs(airy_kernel(x, x + 1e-6) - diag) < 1e-6
    assert abs(float(airy_kernel(x, x)) - diag) < 1e-14


@given(x=st.floats(-30, 30), y=st.floats(-30, 30))
def test_airy_kernel_symmetry_property(x, y):
    assert abs(airy_kernel(x, y) - airy_kernel(y, x)) <= 1e-12 * max(1.0, abs(airy_kernel(x, y)))


def test_airy_kernel_range():
    with pytest.raises(OutOfRange):
        airy_kernel(41.0, 0.0)


# Tracy-Widom

def test_tracy_widom_examples():
    assert abs(tracy_widom_cdf(6.0) - 1) < 1e-6
    assert tracy_widom_cdf(-9.0) < 1e-3
    vals = [tracy_widom_cdf(t) for t in (-4, -2, 0, 2)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_tracy_widom_reference_values():
    # published values of F_2
    assert tracy_widom_cdf(-2.0) == pytest.approx(0.41322414, abs=1e-7)
    assert tracy_widom_cdf(0.0) == pytest.approx(0.96937282, abs=1e-7)


def test_tracy_widom_monotone_grid_and_limits():
    t = np.linspace(-8, 6, 57)
    F = np.array([tracy_widom_cdf(v) for v in t])
    assert np.all(np.diff(F) >= 0) and np.all((F >= 0) & (F <= 1))
    assert tracy_widom_cdf(-10.0) < 1e-3 and tracy_widom_cdf(8.0) > 1 - 1e-3


@pytest.mark.parametrize("t", [-6.0, -2.0, 0.0, 3.0])
def test_tracy_widom_self_convergence(t):
    assert abs(tracy_widom_cdf(t, 40) - tracy_widom_cdf(t, 80)) < 1e-8


def test_tracy_widom_preconditions():
    with pytest.raises(ValueError):
        tracy_widom_cdf(-11.0)
    with pytest.raises(ValueError):
        tracy_widom_cdf(0.0, 8)


# bulk universality

def _sine_error(n, grid):
    K = build_kernel(WeightFamily.gue(n), (n,))
    rho = 1 / math.pi
    u, v = np.meshgrid(grid, grid)
    scaled = K(u / (rho * n), v / (rho * n)) / (rho * n)
    return np.max(np.abs(scaled - sine_kernel(u, v)))


def test_bulk_universality_improves():
    grid = np.linspace(-1, 1, 9)
    assert _sine_error(60, grid) < _sine_error(20, grid)


# Pearcey

def _ray_moment(k):
    # int_0^oo rho^k exp(-rho^4 / 4) d rho
    return 4 ** ((k + 1) / 4) * math.gamma((k + 1) / 4) / 4


def _p_series(x, deriv=0, terms=120):
    out = 0.0
    for k in range(deriv, terms):
        c = _ray_moment(k) / math.pi * (math.sin(3 * (k + 1) * math.pi / 4) - math.sin((k + 1) * math.pi / 4))
        out += c * x ** (k - deriv) / math.factorial(k - deriv)
    return out


def _q_series(y, terms=80):
    out = 0.0
    for m in range(terms):
        out += (-1) ** m * y ** (2 * m) / math.factorial(2 * m) * 2 * _ray_moment(2 * m)
    return out / (2 * math.pi)


@pytest.mark.parametrize("x", [-2.0, -0.5, 0.0, 1.0, 2.5])
def test_pearcey_gamma_series(x):
    p, p1, p2 = pearcey_p(x)
    for got, d in ((p, 0), (p1, 1), (p2, 2)):
        ref = _p_series(x, d)
        assert abs(got - ref) < 1e-10 * max(1.0, abs(ref))
    assert abs(pearcey_q(x)[0] - _q_series(x)) < 1e-10


def test_pearcey_p_at_zero_b0():
    # C is invariant under t -> -t, so p is odd when b = 0
    p, p1, _ = pearcey_p(0.0)
    assert np.isrealobj(p) and np.isrealobj(p1)
    assert abs(p) < 1e-15 and abs(p1) > 1e-3
    x = np.linspace(0.1, 3, 7)
    assert np.allclose(pearcey_p(-x)[0], -pearcey_p(x)[0], atol=1e-14)


@pytest.mark.parametrize("b", [-1.0, 0.0, 1.0])
def test_pearcey_ode_residuals(b):
    rp, rq = pearcey_ode_residuals(np.array([-2.0, 0.0, 2.0]), PearceyParams(b=b))
    assert np.max(np.abs(rp)) < 1e-6 and np.max(np.abs(rq)) < 1e-6


def test_pearcey_kernel_int_examples():
    base = PearceyParams()
    v1 = pearcey_kernel_int(0.0, 0.0, base)
    v2 = pearcey_kernel_int(0.0, 0.0, base.doubled(), check=False)
    assert abs(v1 - v2) < 1e-7
    assert np.isrealobj(v1)


@pytest.mark.parametrize("b", [-1.0, 0.0, 1.0])
def test_pearcey_cross_representation_grid(b):
    g = np.linspace(-3, 3, 5)
    x, y = np.meshgrid(g, g)
    params = PearceyParams(b=b)
    ki = pearcey_kernel_int(x, y, params)
    ko = pearcey_kernel_ode(x, y, params)
    assert np.max(np.abs(ki - ko) / np.maximum(np.abs(ko), 1e-3)) < 1e-5


def test_pearcey_cross_representation_random(rng):
    for b in (0.0, 1.0):
        pts = rng.uniform(-3, 3, (5, 2))
        params = PearceyParams(b=b)
        ki = pearcey_kernel_int(pts[:, 0], pts[:, 1], params)
        ko = pearcey_kernel_ode(pts[:, 0], pts[:, 1], params)
        assert np.max(np.abs(ki - ko) / np.maximum(np.abs(ko), 1e-3)) < 1e-5


def test_pearcey_delta_independence():
    g = np.array([-1.0, 0.3, 1.5])
    a = pearcey_kernel_int(g, g[::-1], PearceyParams(delta=0.5))
    b = pearcey_kernel_int(g, g[::-1], PearceyParams(delta=0.2))
    assert np.max(np.abs(a - b)) < 1e-8


def test_pearcey_diagonal_continuity_and_bounds():
    params = PearceyParams()
    assert abs(pearcey_kernel_ode(0.5, 0.5 + 1e-5, params) - pearcey_kernel_ode(0.5, 0.5 - 1e-5, params)) < 1e-4
    g = np.linspace(-3, 3, 13)
    x, y = np.meshgrid(g, g)
    k = pearcey_kernel_ode(x, y, params)
    assert np.all(np.isfinite(k)) and np.max(np.abs(k)) < 10


def test_pearcey_errors():
    with pytest.raises(OutOfRange):
        pearcey_pq(11.0)
    with pytest.raises(ContourTruncationError):
        pearcey_p(3.0, PearceyParams(R=1.5, m_c=16))
    with pytest.raises(ValueError):
        PearceyParams(m_c=8)
