import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from gaussextrema.errors import DomainError, NormalizationError
from gaussextrema.kernels import TaylorCoefficients, make_gaussian, make_random_wave, taylor_coefficients
from gaussextrema.numerics import derivative
from gaussextrema.specfun import jn
from gaussextrema.twopoint import (
    R_SWITCH,
    absolute_density,
    absolute_density_oracle,
    bulk_quantities,
    charge_correlation,
    omega_potential,
    psi,
    psi_closed,
    psi_omega_form,
    psi_series,
    psi_series_coefficients,
    psi_total_derivative,
    radial_divergence,
    sum_rule_check,
    two_point_curve,
)

RW = make_random_wave(2.0)
GAUSS = make_gaussian()
S3 = math.sqrt(3.0)


def test_bulk_quantities_random_wave():
    r = np.array([0.3, 1.0, 4.0, 9.0])
    q = bulk_quantities(RW, r)
    assert np.allclose(q.Z1, -jn(0, r) + jn(2, r), atol=1e-14)
    assert np.allclose(q.Z2, -(jn(0, r) + jn(2, r)), atol=1e-14)
    assert np.allclose(q.Z2p, (q.Z1 - q.Z2) / r, atol=1e-14)
    assert np.allclose(q.D1, 1 - q.Z1 ** 2, atol=1e-14)
    assert np.allclose(q.D, 1 - q.Z1 * q.Z2, atol=1e-14)


@pytest.mark.parametrize("kernel", [RW, GAUSS])
def test_small_r_limits(kernel):
    b = taylor_coefficients(kernel).b
    r = 1e-4
    q = bulk_quantities(kernel, r)
    assert q.D1 / r ** 2 == pytest.approx(b, rel=1e-6)
    assert q.D2 / r ** 2 == pytest.approx(b / 3, rel=1e-6)
    assert q.Z1 == pytest.approx(-1, abs=1e-7) and q.Z2 == pytest.approx(-1, abs=1e-7)


@given(st.floats(1e-3, 30.0))
def test_gaussian_D_nonnegative(r):
    assert bulk_quantities(GAUSS, r).D >= 0


def test_psi_at_origin():
    assert psi(RW, 0.0) == pytest.approx(1 / S3, abs=1e-15)
    assert psi(GAUSS, 0.0) == pytest.approx(4 * 3 / (3 * S3), abs=1e-15)


def test_series_coefficients():
    _, p2, p4 = psi_series_coefficients(taylor_coefficients(RW))
    assert p2 == pytest.approx(-1 / (48 * S3), abs=1e-15)
    assert p4 == pytest.approx(-1 / (2304 * S3), abs=1e-15)
    _, p2g, _ = psi_series_coefficients(taylor_coefficients(GAUSS))
    assert p2g == pytest.approx(-2 / S3, abs=1e-14)
    tc = TaylorCoefficients(2.0, 5.0, 1.0, 0.0, 1.0)
    assert psi_series(tc, 0.0) == pytest.approx(8 / (3 * S3))
    with pytest.raises(NormalizationError):
        psi_series_coefficients(TaylorCoefficients(2.0, 5.0, 1.0, 0.0, 2.0))


def test_small_r_fit_reproduces_series():
    # least-squares fit of the closed form alone, away from the series branch
    r = np.linspace(0.1, 0.8, 200)
    y = S3 * psi_closed(RW, r) - 1
    design = np.stack([r ** 2, r ** 4, r ** 6, r ** 8], axis=1)
    coef = np.linalg.lstsq(design, y, rcond=None)[0]
    assert coef[0] == pytest.approx(-1 / 48, abs=1e-4)
    assert coef[1] == pytest.approx(-1 / 2304, abs=1e-4)


@pytest.mark.parametrize("kernel", [RW, GAUSS])
def test_continuity_at_switch(kernel):
    series = psi_series(taylor_coefficients(kernel), R_SWITCH)
    assert abs(series - psi_closed(kernel, R_SWITCH)) < 1e-9


@given(st.floats(0.1, 10.0), st.sampled_from(["rw", "gauss"]))
def test_three_forms_agree(r, which):
    kernel = RW if which == "rw" else GAUSS
    closed = psi_closed(kernel, r)
    assert psi_omega_form(kernel, r) == pytest.approx(closed, abs=1e-8)
    s = kernel.hessian_split(r)
    assume(abs(s) > 1e-2)
    assert psi_total_derivative(kernel, r) == pytest.approx(closed, abs=1e-8)


def test_closed_form_matches_series_route_at_one():
    assert psi(RW, 1.0) == pytest.approx(psi_omega_form(RW, 1.0), abs=1e-8)


def test_charge_correlation_limits():
    assert (2 * math.pi) ** 2 * charge_correlation(RW, 1e-5) == pytest.approx(-1 / (24 * S3), abs=1e-8)
    tc = taylor_coefficients(GAUSS)
    generic = -2 * (tc.c - tc.b ** 2) / (3 * S3)
    assert (2 * math.pi) ** 2 * charge_correlation(GAUSS, 1e-5) == pytest.approx(generic, abs=1e-8)


def test_random_wave_peak_and_plateau():
    r = np.linspace(0.01, 10.0, 2000)
    c4 = two_point_curve(RW, r).C_times_4pi2
    assert abs(r[np.argmin(c4)] - 3.4) <= 0.1
    assert np.all(c4[r <= 1.0] < 0)


def test_curve_is_psi_derivative_over_r():
    r = np.linspace(0.2, 9.0, 45)
    curve = two_point_curve(RW, r)
    fd = derivative(lambda t: psi(RW, t), r, 0.01)
    assert np.allclose(curve.C_times_4pi2, fd / r, atol=1e-9)
    tags = two_point_curve(RW, np.array([0.01, 0.05, 0.06])).method_tags
    assert tags == ("series", "series", "closed_form")


def test_omega_identities():
    r = 2.0
    om11, om22 = omega_potential(RW, r)
    d = derivative(lambda t: t * omega_potential(RW, t)[0], r, 0.05)
    assert psi(RW, r) == pytest.approx(om22 - d, abs=1e-7)
    div = radial_divergence(lambda t: omega_potential(RW, t), r)
    assert div == pytest.approx((2 * math.pi) ** 2 * charge_correlation(RW, r), abs=1e-6)
    rs = np.linspace(0.1, 10.0, 60)
    assert np.all(omega_potential(RW, rs)[0] <= 0)


def test_absolute_density():
    assert absolute_density(RW) == pytest.approx(1 / (2 * math.pi * S3), rel=1e-14)
    assert absolute_density(GAUSS) == pytest.approx(2 / (math.pi * S3), rel=1e-14)
    for k in (RW, GAUSS):
        assert psi(k, 0.0) / (2 * math.pi) == pytest.approx(absolute_density(k), abs=1e-12)
        oracle = absolute_density_oracle(k)
        assert abs(oracle - absolute_density(k)) < 1e-8
        # <|det|> at unit gradient variance is 2 pi n0 = 4 b / (3 sqrt 3)
        b = taylor_coefficients(k).b
        assert 2 * math.pi * oracle == pytest.approx(4 * b / (3 * S3), rel=1e-9)


def test_sum_rules():
    rw = sum_rule_check(RW, 60.0, oracle=False)
    assert rw.residual < 1e-4
    assert rw.residual == abs(rw.integral_value + rw.n0_closed)
    g = sum_rule_check(GAUSS, 12.0, oracle=False)
    assert g.residual < 1e-8 and g.tail_converged


def test_sum_rule_epsilon_stable():
    a = sum_rule_check(GAUSS, 12.0, r_min=1e-3, oracle=False).integral_value
    b = sum_rule_check(GAUSS, 12.0, r_min=5e-4, oracle=False).integral_value
    assert abs(a - b) < 1e-6


def test_sum_rule_flags_unconverged_tail():
    assert not sum_rule_check(RW, 3.0, oracle=False, tail_tol=1e-3).tail_converged


def test_validation():
    with pytest.raises(NormalizationError):
        psi(make_random_wave(1.0), 1.0)
    with pytest.raises(DomainError):
        charge_correlation(RW, 0.0)
    with pytest.raises(DomainError):
        psi(RW, -1.0)
    with pytest.raises(DomainError):
        sum_rule_check(GAUSS, 1.0, r_min=2.0)
