import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaussextrema.errors import DomainError
from gaussextrema.numerics import derivative
from gaussextrema.specfun import (
    bessel_j,
    bessel_k,
    half_minus_j1_over_x,
    j0_derivative,
    j0_second_derivative_excess,
    jn,
    jn_with_bound,
    kn,
    kn_with_bound,
)

mpmath.mp.dps = 40

SAMPLES = np.concatenate([np.geomspace(1e-8, 1.0, 25), np.linspace(1.0, 60.0, 120),
                          np.geomspace(60.0, 700.0, 20)])


def mp_j(n, x):
    return float(mpmath.besselj(n, x))


def mp_k(n, x):
    return float(mpmath.besselk(n, x))


@pytest.mark.parametrize("order", [0, 1, 2])
def test_j_against_mpmath(order):
    values, bounds = jn_with_bound(order, SAMPLES)
    ref = np.array([mp_j(order, x) for x in SAMPLES])
    assert np.all(np.abs(values - ref) <= np.maximum(bounds, 1e-15))
    assert np.all(bounds <= 1e-12 * np.maximum(1.0, np.abs(ref)))


@pytest.mark.parametrize("order", [0, 1, 2])
def test_k_against_mpmath(order):
    values, bounds = kn_with_bound(order, SAMPLES)
    ref = np.array([mp_k(order, x) for x in SAMPLES])
    rel = np.abs(values - ref) / np.abs(ref)
    assert np.all(rel <= 1e-12)
    assert np.all(np.abs(values - ref) <= np.maximum(bounds, 1e-300))
    assert np.all(bounds <= 1e-12 * np.maximum(1.0, np.abs(ref)))


def test_j_special_values():
    assert bessel_j(0, 0.0).value == 1.0
    assert bessel_j(1, 0.0).value == 0.0
    assert abs(bessel_j(0, 2.404825557695773).value) < 1e-10


def test_first_zero_against_power_series():
    # 50-term power series in 40-digit arithmetic
    x = mpmath.mpf("2.404825557695773")
    series = mpmath.fsum((-1) ** m * (x / 2) ** (2 * m) / mpmath.factorial(m) ** 2 for m in range(50))
    assert abs(bessel_j(0, 2.404825557695773).value - float(series)) < 1e-15


def test_k_large_argument_asymptote():
    x = 50.0
    ratio = bessel_k(0, x).value / (math.sqrt(math.pi / (2 * x)) * math.exp(-x))
    assert abs(ratio - 1.0) < 1e-2  # leading term alone; next correction is -1/(8x)
    assert abs(ratio - (1 - 1 / (8 * x) + 9 / (128 * x * x))) < 1e-6


def test_k1_derivative_identity():
    fd = derivative(lambda t: kn(1, t), 1.0, 0.05)
    assert abs(fd + 0.5 * (bessel_k(0, 1).value + bessel_k(2, 1).value)) < 1e-8


def test_k_recurrence():
    k0, k1, k2 = (bessel_k(n, 1.0).value for n in range(3))
    assert abs(k2 - (k0 + 2 * k1)) < 1e-12


@given(st.floats(0.1, 50.0))
def test_j_recurrence(x):
    assert abs(2 * jn(1, x) / x - jn(0, x) - jn(2, x)) < 1e-12


@given(st.floats(0.1, 50.0))
def test_j_derivative_identities(x):
    h = 1e-5
    d0 = (jn(0, x + h) - jn(0, x - h)) / (2 * h)
    d2 = (jn(2, x + h) - jn(2, x - h)) / (2 * h)
    assert abs(d0 + jn(1, x)) < 1e-8
    assert abs(d2 - (jn(1, x) - 2 * jn(2, x) / x)) < 1e-8


@pytest.mark.parametrize("k", range(5))
def test_j0_derivatives_against_mpmath(k):
    xs = np.array([1e-6, 0.01, 0.5, 2.0, 3.99, 4.01, 7.0, 20.0, 60.0])
    ref = np.array([float(mpmath.diff(lambda t: mpmath.besselj(0, t), x, k)) for x in xs])
    assert np.allclose(j0_derivative(xs, k), ref, rtol=0, atol=1e-13)


def test_cancellation_free_helpers():
    xs = np.array([1e-7, 1e-3, 0.3, 3.0, 4.5, 30.0])
    half = [float(mpmath.mpf(1) / 2 - mpmath.besselj(1, x) / x) for x in xs]
    excess = [float(mpmath.diff(lambda t: mpmath.besselj(0, t), x, 2) + mpmath.mpf(1) / 2) for x in xs]
    assert np.allclose(half_minus_j1_over_x(xs), half, rtol=1e-12, atol=1e-300)
    assert np.allclose(j0_second_derivative_excess(xs), excess, rtol=1e-10, atol=1e-300)


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), -1.0])
def test_j_domain_errors(bad):
    with pytest.raises(DomainError):
        bessel_j(0, bad)


@pytest.mark.parametrize("bad", [0.0, -2.0, float("nan")])
def test_k_domain_errors(bad):
    with pytest.raises(DomainError):
        bessel_k(0, bad)


def test_order_validation():
    with pytest.raises(DomainError):
        jn(3, 1.0)
    with pytest.raises(DomainError):
        bessel_j(0, np.array([1.0, 2.0]))


def test_vectorized_matches_scalar():
    xs = np.array([0.3, 6.0, 30.0])
    assert np.array_equal(jn(1, xs), [bessel_j(1, x).value for x in xs])
    assert np.array_equal(kn(2, xs), [bessel_k(2, x).value for x in xs])
