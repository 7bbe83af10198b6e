import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaussextrema.numerics import derivative, gauss_legendre, integrate
from gaussextrema.specfun import jn


def test_integrate_polynomial_exact():
    res = integrate(lambda x: x ** 5 - 3 * x, 0.0, 2.0)
    assert abs(res.value - (64 / 6 - 6)) < 1e-13


def test_integrate_oscillatory_bessel_tail():
    # int_0^X J_1 = 1 - J_0(X)
    res = integrate(lambda x: jn(1, x), 0.0, 80.0, atol=1e-12, initial_pieces=40)
    assert abs(res.value - (1 - jn(0, 80.0))) < 1e-11
    assert res.error < 1e-10


def test_integrate_breakpoints_handle_kink():
    res = integrate(lambda x: np.abs(x - 0.3), 0.0, 1.0, points=[0.3])
    assert abs(res.value - (0.3 ** 2 + 0.7 ** 2) / 2) < 1e-14


def test_gauss_legendre_smooth():
    assert abs(gauss_legendre(np.exp, 0.0, 1.0, pieces=4) - (math.e - 1)) < 1e-14


@given(st.floats(0.2, 5.0))
def test_derivative_richardson(x):
    d, err = derivative(np.sin, x, 0.1, return_error=True)
    assert abs(d - math.cos(x)) < 1e-11
    assert err < 1e-6


def test_derivative_vectorized():
    xs = np.linspace(0.5, 2.0, 7)
    assert np.allclose(derivative(np.exp, xs, 0.05), np.exp(xs), rtol=1e-11)
