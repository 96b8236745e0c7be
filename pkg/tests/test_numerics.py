import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special as sp

from mopens.numerics import (
    DomainError,
    InvalidInterval,
    InvalidOrder,
    NonHermitianInput,
    OutOfRange,
    RuleKind,
    SingularDiscretization,
    airy_ai,
    airy_ai_array,
    bessel_i,
    composite_legendre,
    fredholm_det,
    gauss_hermite,
    gauss_legendre,
    hermitian_eigenvalues,
    log_bessel_i,
    log_gamma,
)
from mopens.limits import airy_kernel



def random_hermitian(n, rng):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


# quadrature

def test_gauss_legendre_midpoint():
    r = gauss_legendre(1, -1, 1)
    assert r.nodes.tolist() == [0.0]
    assert r.weights.tolist() == pytest.approx([2.0], abs=1e-15)
    assert r.kind is RuleKind.LEGENDRE


def test_gauss_legendre_examples():
    r = gauss_legendre(16, -1, 1)
    assert abs(r.integrate(r.nodes ** 10) - 2 / 11) < 1e-13
    r = gauss_legendre(16, 0, 2)
    assert abs(r.integrate(np.ones(16)) - 2) < 1e-13
    assert np.all((r.nodes > 0) & (r.nodes < 2))


@pytest.mark.parametrize("lo,hi", [(1, 1), (2, -1)])
def test_gauss_legendre_invalid_interval(lo, hi):
    with pytest.raises(InvalidInterval):
        gauss_legendre(4, lo, hi)


def test_rule_invariants():
    r = gauss_legendre(30, -3, 5)
    assert np.all(np.diff(r.nodes) > 0) and np.all(r.weights > 0)
    with pytest.raises(ValueError):
        r.nodes[0] = 1.0


@given(m=st.integers(16, 40), k=st.integers(0, 20),
       lo=st.floats(-3, 0), width=st.floats(0.5, 4))
def test_legendre_monomial_exactness(m, k, lo, width):
    hi = lo + width
    r = gauss_legendre(m, lo, hi)
    exact = (hi ** (k + 1) - lo ** (k + 1)) / (k + 1)
    got = r.integrate(r.nodes ** k)
    assert abs(got - exact) <= 1e-12 * max(1.0, abs(exact), (abs(lo) + abs(hi)) ** (k + 1))


@given(m=st.integers(1, 12), data=st.data())
def test_legendre_random_polynomials(m, data):
    deg = data.draw(st.integers(0, 2 * m - 1))
    c = np.array(data.draw(st.lists(st.floats(-2, 2), min_size=deg + 1, max_size=deg + 1)))
    r = gauss_legendre(m, -1, 1)
    anti = np.polynomial.polynomial.polyint(c)
    exact = np.polynomial.polynomial.polyval(1, anti) - np.polynomial.polynomial.polyval(-1, anti)
    assert abs(r.integrate(np.polynomial.polynomial.polyval(r.nodes, c)) - exact) < 1e-11


def test_gauss_hermite_examples():
    r = gauss_hermite(1)
    assert r.nodes.tolist() == [0.0] and r.weights[0] == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    r = gauss_hermite(8)
    assert abs(r.integrate(r.nodes ** 2) - math.sqrt(math.pi) / 2) < 1e-12
    assert abs(r.integrate(r.nodes)) < 1e-14
    assert r.kind is RuleKind.HERMITE


@given(m=st.integers(1, 20), data=st.data())
def test_hermite_exactness(m, data):
    k = data.draw(st.integers(0, 2 * m - 1))
    r = gauss_hermite(m)
    exact = 0.0 if k % 2 else math.gamma((k + 1) / 2)
    assert abs(r.integrate(r.nodes ** k) - exact) < 1e-10 * max(1.0, math.gamma((k + 1) / 2))


def test_composite_legendre():
    r = composite_legendre(4, 10, 0, 2)
    assert len(r) == 40 and abs(r.integrate(np.exp(r.nodes)) - (math.e ** 2 - 1)) < 1e-13


# special functions

def test_airy_zero():
    ai, aip = airy_ai(0.0)
    assert ai == pytest.approx(3 ** (-2 / 3) / math.gamma(2 / 3), rel=1e-14)
    assert aip == pytest.approx(-(3 ** (-1 / 3)) / math.gamma(1 / 3), rel=1e-14)
    assert ai == pytest.approx(0.35502805, abs=1e-8) and aip == pytest.approx(-0.25881940, abs=1e-8)


def test_airy_decay():
    ai, _ = airy_ai(10.0)
    assert 0 < ai < 1e-9


def test_airy_against_scipy():
    x = np.linspace(-15, 15, 3001)
    ai, aip = airy_ai_array(x)
    ref = sp.airy(x)
    # relative error, measured against the local envelope near the oscillatory zeros
    env = np.maximum(np.abs(ref[0]), np.abs(ref[1]) / (1 + np.sqrt(np.abs(x))))
    assert np.max(np.abs(ai - ref[0]) / env) < 1e-10
    envp = np.maximum(np.abs(ref[1]), np.abs(ref[0]) * (1 + np.sqrt(np.abs(x))))
    assert np.max(np.abs(aip - ref[1]) / envp) < 1e-10
    away = np.abs(ref[0]) > 1e-3 * env
    assert np.max(np.abs(ai[away] - ref[0][away]) / np.abs(ref[0][away])) < 1e-10


def _airy_second(x, h=1e-2):
    # Richardson-extrapolated central difference of Ai'
    d = lambda k: (airy_ai_array(x + k)[1] - airy_ai_array(x - k)[1]) / (2 * k)  # noqa: E731
    return (4 * d(h / 2) - d(h)) / 3


@pytest.mark.parametrize("x", [-5.0, 0.0, 5.0])
def test_airy_ode_examples(x):
    ai = airy_ai(x)[0]
    assert abs(_airy_second(np.array([x]))[0] - x * ai) < 1e-8 * max(1.0, abs(x))


def test_airy_ode_property():
    x = np.linspace(-8, 8, 161)
    ai = airy_ai_array(x)[0]
    assert np.max(np.abs(_airy_second(x) - x * ai)) < 1e-8


def test_airy_ode_plain_central_difference():
    # with h = 1e-3 the central difference carries the truncation error
    # h^2/12 Ai''''(x) = h^2/12 (x^2 Ai + 2 Ai'), up to 1.6e-6 near x = -7.5;
    # after removing it the residual is at rounding level
    h = 1e-3
    x = np.linspace(-8, 8, 161)
    ai, aip = airy_ai_array(x)
    second = (airy_ai_array(x + h)[0] - 2 * ai + airy_ai_array(x - h)[0]) / h ** 2
    truncation = h ** 2 / 12 * (x * x * ai + 2 * aip)
    assert np.max(np.abs(second - x * ai - truncation)) < 1e-8


def test_airy_range():
    with pytest.raises(OutOfRange):
        airy_ai(40.5)
    with pytest.raises(OutOfRange):
        airy_ai_array([0.0, -41.0])
    airy_ai(-40.0)


def test_bessel_examples():
    assert bessel_i(0, 0) == 1.0
    assert bessel_i(1, 0) == 0.0
    assert bessel_i(0.5, 1) == pytest.approx(math.sqrt(2 / math.pi) * math.sinh(1), rel=1e-13)
    with pytest.raises(InvalidOrder):
        bessel_i(-1.0, 1.0)
    with pytest.raises(DomainError):
        bessel_i(0.0, -1.0)


@given(alpha=st.floats(-0.99, 8), x=st.floats(1e-3, 60))
def test_bessel_vs_scipy(alpha, x):
    ref = sp.ive(alpha, x)
    got = math.exp(log_bessel_i(alpha, x) - x)
    assert got == pytest.approx(ref, rel=1e-10)


@given(alpha=st.floats(0.5, 5), x=st.floats(0.5, 20))
def test_bessel_recurrence(alpha, x):
    lhs = bessel_i(alpha - 1, x) - bessel_i(alpha + 1, x)
    rhs = 2 * alpha / x * bessel_i(alpha, x)
    assert lhs == pytest.approx(rhs, rel=1e-8)


def test_bessel_large_argument_log_space():
    assert log_bessel_i(2.0, 800.0) == pytest.approx(math.log(sp.ive(2.0, 800.0)) + 800.0, rel=1e-13)


def test_log_gamma_examples():
    assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-15)
    assert log_gamma(5.0) == pytest.approx(math.log(24), rel=1e-14)
    assert log_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-14)
    with pytest.raises(DomainError):
        log_gamma(0.0)


@given(x=st.floats(1e-6, 170))
def test_log_gamma_vs_stdlib(x):
    ref = math.lgamma(x)
    assert abs(log_gamma(x) - ref) <= 1e-12 * max(1.0, abs(ref))


# eigenvalues

def test_eigen_examples():
    assert hermitian_eigenvalues(np.diag([3.0, 1.0, 2.0])).tolist() == pytest.approx([1, 2, 3], abs=1e-15)
    assert hermitian_eigenvalues(np.array([[0, 1], [1, 0]])).tolist() == pytest.approx([-1, 1], abs=1e-15)
    assert hermitian_eigenvalues(np.zeros((0, 0))).size == 0


def test_eigen_cubic_oracle(rng):
    m = random_hermitian(3, rng)
    roots = np.sort(np.roots(np.poly(m)).real)
    assert np.allclose(hermitian_eigenvalues(m), roots, atol=1e-9)


def test_eigen_rejects_non_hermitian():
    with pytest.raises(NonHermitianInput):
        hermitian_eigenvalues(np.array([[0, 1], [0, 0]]))
    with pytest.raises(NonHermitianInput):
        hermitian_eigenvalues(np.ones((2, 3)))


@given(n=st.integers(1, 40), seed=st.integers(0, 2 ** 31))
def test_eigen_trace_and_reconstruction(n, seed):
    rng = np.random.default_rng(seed)
    m = random_hermitian(n, rng)
    lam = hermitian_eigenvalues(m)
    assert np.all(np.diff(lam) >= 0)
    assert abs(lam.sum() - np.trace(m).real) < 1e-10 * n * max(1.0, np.abs(m).max())
    assert np.allclose(lam, np.linalg.eigvalsh(m), atol=1e-11 * n)


@given(n=st.integers(2, 25), seed=st.integers(0, 2 ** 31))
def test_eigen_unitary_invariance(n, seed):
    rng = np.random.default_rng(seed)
    m = random_hermitian(n, rng)
    u = np.eye(n, dtype=complex)
    for _ in range(3):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v /= np.linalg.norm(v)
        u = u @ (np.eye(n) - 2 * np.outer(v, v.conj()))
    m2 = u @ m @ u.conj().T
    m2 = (m2 + m2.conj().T) / 2
    assert np.allclose(hermitian_eigenvalues(m2), hermitian_eigenvalues(m), atol=1e-9)


def test_eigen_degenerate_spectrum():
    assert np.allclose(hermitian_eigenvalues(np.eye(6) * 2.5), 2.5, atol=1e-14)


# Fredholm determinants

def test_fredholm_zero_kernel():
    assert fredholm_det(lambda x, y: 0 * x * y, 0.0, 1.0, 8) == 1.0


def test_fredholm_rank_one():
    u = lambda x: 0.8 * np.exp(-(x - 0.5) ** 2 / 0.02)  # noqa: E731
    # int_0^1 u^2 = 0.64 * sqrt(pi * 0.01) * erf(0.5 / 0.1)
    norm2 = 0.64 * math.sqrt(math.pi * 0.01) * math.erf(5.0)
    assert abs(fredholm_det(lambda x, y: u(x) * u(y), 0.0, 1.0, 40) - (1 - norm2)) < 1e-10


def test_fredholm_airy_self_convergence():
    d40 = fredholm_det(airy_kernel, 4.0, 16.0, 40)
    d80 = fredholm_det(airy_kernel, 4.0, 16.0, 80)
    assert abs(d40 - d80) < 1e-8


def test_fredholm_cauchy_refinement():
    d = [fredholm_det(airy_kernel, -3.0, 9.0, m) for m in (8, 16, 32, 64)]
    gaps = np.abs(np.diff(d))
    assert gaps[0] > gaps[1] > gaps[2] or gaps[2] < 1e-14


def test_fredholm_errors():
    with pytest.raises(ValueError):
        fredholm_det(airy_kernel, 0.0, 1.0, 3)
    with pytest.raises(SingularDiscretization):
        fredholm_det(lambda x, y: np.full(np.broadcast(x, y).shape, np.nan), 0.0, 1.0, 8)
