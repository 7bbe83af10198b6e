r"""Charge-charge correlation of the extremal points of a Gaussian field.

For a kernel normalized to ``-G''(0) = 1`` define, at separation ``r``,

    Z1 = G''(r),  Z2 = G'(r)/r,  D1 = 1 - Z1^2,  D2 = 1 - Z2^2,  D = 1 - Z1 Z2.

The correlation of the topological charge density is the radial derivative
of a potential,

    (2 pi)^2 C(r) = psi'(r) / r,
    psi = (Z1 - Z2) / (r sqrt(D1 D2))
          * [3 (Z1' - Z2') + (Z1 - Z2) (Z1 Z1'/D1 + Z2 Z2'/D2)],

which near the origin is replaced by its Taylor series in ``r^2``.  Since
``psi(infinity) = 0``, ``int_0^inf psi' dr = -psi(0)`` and the correlation
obeys the perfect-screening sum rule against the absolute density ``n0``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMetricError, DomainError, NormalizationError
from .kernels import taylor_coefficients
from .numerics import derivative, integrate

__all__ = [
    "BulkQuantities",
    "TwoPointCurve",
    "SumRuleReport",
    "bulk_quantities",
    "psi",
    "psi_closed",
    "psi_omega_form",
    "psi_total_derivative",
    "psi_series",
    "psi_series_coefficients",
    "psi_derivative",
    "charge_correlation",
    "omega_potential",
    "radial_divergence",
    "absolute_density",
    "absolute_density_oracle",
    "sum_rule_check",
    "two_point_curve",
]

R_SWITCH = 0.05
SQRT3 = math.sqrt(3.0)
NORMALIZATION_TOL = 1e-10


@dataclass(frozen=True)
class BulkQuantities:
    Z1: np.ndarray
    Z2: np.ndarray
    Z1p: np.ndarray
    Z2p: np.ndarray
    Z1pp: np.ndarray
    Z2pp: np.ndarray
    D1: np.ndarray
    D2: np.ndarray
    D: np.ndarray


@dataclass(frozen=True)
class TwoPointCurve:
    r_grid: np.ndarray
    psi: np.ndarray
    C: np.ndarray
    method_tags: tuple

    @property
    def C_times_4pi2(self):
        return (2 * np.pi) ** 2 * self.C


@dataclass(frozen=True)
class SumRuleReport:
    """Screening check ``2 pi int r C dr = -n0``.

    ``integral_value`` includes the tail estimate ``-psi(r_max)/(2 pi)``;
    ``tail_converged`` is false when that tail exceeds ``tail_tol``.
    """

    n0_closed: float
    n0_quadrature: float
    integral_value: float
    residual: float
    tail: float
    tail_converged: bool


def _require_normalized(kernel):
    gv = kernel.gradient_variance
    if abs(gv - 1.0) > NORMALIZATION_TOL:
        raise NormalizationError(
            f"{kernel.label} has -G''(0) = {gv:g}; rescale with kernels.normalize")


def _positive(r):
    r = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(r)) or np.any(r <= 0):
        raise DomainError("separation r must be positive and finite")
    return r


def _out(x, like):
    return float(x) if np.ndim(like) == 0 else x


def bulk_quantities(kernel, r):
    """``Z1, Z2``, their first two derivatives and ``D1, D2, D`` at ``r``."""
    _require_normalized(kernel)
    r = _positive(r)
    # a = 1 + Z1, c = 1 + Z2 carry the small-r information without cancellation
    a, c = kernel.hessian_excess(r)
    split = kernel.hessian_split(r)
    Z1, Z2 = kernel.eval(r, 2), kernel.eval(r, 1) / r
    Z1p = kernel.eval(r, 3)
    Z2p = split / r
    Z1pp = kernel.eval(r, 4)
    Z2pp = (Z1p - 2.0 * Z2p) / r
    D1 = (2.0 - a) * a
    D2 = (2.0 - c) * c
    D = a + c - a * c
    vals = (Z1, Z2, Z1p, Z2p, Z1pp, Z2pp, D1, D2, D)
    return BulkQuantities(*(_out(v, r) for v in vals))


def _root_det(q):
    P = np.asarray(q.D1 * q.D2)
    if np.any(~(P > 0)):
        raise DegenerateMetricError("D1*D2 must be positive; the two-point metric is singular")
    return np.sqrt(P)


def psi_closed(kernel, r):
    """Expanded product-rule form of the potential."""
    r = _positive(r)
    q = bulk_quantities(kernel, r)
    s = kernel.hessian_split(r)
    bracket = 3.0 * (q.Z1p - q.Z2p) + s * (q.Z1 * q.Z1p / q.D1 + q.Z2 * q.Z2p / q.D2)
    return _out(s * bracket / (r * _root_det(q)), r)


def omega_potential(kernel, r):
    """Radial components ``(Omega11, Omega22)`` of the gradient-field potential."""
    q = bulk_quantities(kernel, r)
    root = _root_det(q)
    return _out(-q.Z2p ** 2 / root, r), _out(q.Z1p * q.Z2p / root, r)


def psi_omega_form(kernel, r):
    """``psi = Omega22 - Omega11 - r Omega11'`` with ``Omega11'`` in closed form."""
    r = _positive(r)
    q = bulk_quantities(kernel, r)
    root = _root_det(q)
    om11 = -q.Z2p ** 2 / root
    om22 = q.Z1p * q.Z2p / root
    log_rate = q.Z1 * q.Z1p / q.D1 + q.Z2 * q.Z2p / q.D2  # = -(sqrt(D1 D2))'/sqrt(D1 D2)
    dom11 = -2.0 * q.Z2p * q.Z2pp / root + om11 * log_rate
    return _out(om22 - om11 - r * dom11, r)


def psi_total_derivative(kernel, r, h=None):
    """``psi = (s^3 / sqrt(D1 D2))' / (r s)``, ``s = Z1 - Z2``, by differentiation.

    Singular where ``Z1 = Z2``; meant as a cross-check away from those radii.
    """
    r = _positive(r)

    def flux(t):
        q = bulk_quantities(kernel, t)
        return kernel.hessian_split(t) ** 3 / _root_det(q)

    step = np.minimum(0.05, 0.25 * r) if h is None else h
    dflux = derivative(flux, r, step, levels=5)
    return _out(dflux / (r * kernel.hessian_split(r)), r)


def psi_series_coefficients(coeffs):
    """Coefficients ``(p0, p2, p4)`` of ``psi = p0 + p2 r^2 + p4 r^4 + O(r^6)``."""
    if abs(coeffs.normalization - 1.0) > NORMALIZATION_TOL:
        raise NormalizationError("series requires -G''(0) = 1")
    b, c, d = coeffs.b, coeffs.c, coeffs.d
    if not b > 0:
        raise DomainError("b must be positive")
    p0 = 4.0 * b / (3.0 * SQRT3)
    p2 = (b * b - c) / (3.0 * SQRT3)
    p4 = (45.0 * b ** 4 - 56.0 * b * b * c + 3.0 * c * c + 10.0 * b * d) / (540.0 * SQRT3 * b)
    return p0, p2, p4


def psi_series(coeffs, r):
    p0, p2, p4 = psi_series_coefficients(coeffs)
    r = np.asarray(r, dtype=float)
    r2 = r * r
    return _out(p0 + r2 * (p2 + r2 * p4), r)


def psi(kernel, r, r_switch=R_SWITCH):
    """Potential ``psi(r)``: series for ``r <= r_switch``, closed form beyond."""
    _require_normalized(kernel)
    r = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(r)) or np.any(r < 0):
        raise DomainError("r must be non-negative and finite")
    flat = np.atleast_1d(r).ravel()
    out = np.empty_like(flat)
    near = flat <= r_switch
    if np.any(near):
        out[near] = psi_series(taylor_coefficients(kernel), flat[near])
    if np.any(~near):
        out[~near] = psi_closed(kernel, flat[~near])
    return _out(out.reshape(np.shape(r)), r)


def psi_derivative(kernel, r, r_switch=R_SWITCH):
    """``psi'(r)``: series derivative near 0, Richardson differences beyond.

    The difference stencil is confined to ``[r/2, 3r/2]`` so it never crosses
    into the series branch.
    """
    _require_normalized(kernel)
    r = _positive(r)
    flat = np.atleast_1d(r).ravel()
    out = np.empty_like(flat)
    near = flat <= r_switch
    if np.any(near):
        _, p2, p4 = psi_series_coefficients(taylor_coefficients(kernel))
        x = flat[near]
        out[near] = 2.0 * p2 * x + 4.0 * p4 * x ** 3
    if np.any(~near):
        x = flat[~near]
        h = np.minimum(0.05, 0.5 * x)
        out[~near] = derivative(lambda t: psi_closed(kernel, t), x, h, levels=4)
    return _out(out.reshape(np.shape(r)), r)


def charge_correlation(kernel, r, r_switch=R_SWITCH):
    """``C(r) = psi'(r) / (r (2 pi)^2)`` for ``r > 0``."""
    r = _positive(r)
    return _out(psi_derivative(kernel, r, r_switch) / (r * (2 * np.pi) ** 2), r)


def radial_divergence(omega, r, h=None):
    """``-d_i d_j Omega_ij`` for an isotropic matrix field.

    ``omega(r)`` returns ``(Omega11, Omega22)``; the operator is
    ``-(r Omega11')'/r - (Omega11 - Omega22)'/r``, evaluated by differences.
    """
    r = _positive(r)
    step = np.minimum(0.05, 0.25 * r) if h is None else h
    om11 = lambda t: omega(t)[0]  # noqa: E731
    diff = lambda t: omega(t)[0] - omega(t)[1]  # noqa: E731
    flux = lambda t: t * derivative(om11, t, 0.5 * step, levels=4)  # noqa: E731
    lap = derivative(flux, r, step, levels=3) / r
    return -(lap + derivative(diff, r, step, levels=4) / r)


def absolute_density(kernel):
    """Mean number of extremal points per unit area, ``2 G''''(0) / (3 pi sqrt 3)``."""
    _require_normalized(kernel)
    b = taylor_coefficients(kernel).b
    return 2.0 * b / (3.0 * math.pi * SQRT3)


def absolute_density_oracle(kernel, *, tol=1e-12, radius_cut=40.0):
    """``n0`` from the Gaussian average of ``|det Hessian|`` at a zero gradient.

    With ``X = (phi_xx + phi_yy)/sqrt 2``, ``Y = (phi_xx - phi_yy)/sqrt 2`` and
    ``Z = phi_xy`` (independent, variances ``4b/3``, ``2b/3``, ``b/3``), the
    determinant is ``X^2/2 - Y^2/2 - Z^2``.  In spherical coordinates of the
    standardized variables the average is a nested ``(rho, theta)`` integral
    whose angular integrand has a kink where the determinant changes sign.
    """
    _require_normalized(kernel)
    b = taylor_coefficients(kernel).b
    var_x, var_y, var_z = 4.0 * b / 3.0, 2.0 * b / 3.0, b / 3.0
    # Y and Z have equal weight after standardization, so the azimuth drops out
    if not math.isclose(var_y / 2.0, var_z, rel_tol=1e-14):
        raise DomainError("Hessian moments are not isotropic")
    wx, wyz = var_x / 2.0, var_z

    def radial(theta):
        ang = np.abs(wx * math.cos(theta) ** 2 - wyz * math.sin(theta) ** 2) * math.sin(theta)
        inner = integrate(lambda rho: rho ** 4 * np.exp(-0.5 * rho * rho), 0.0, radius_cut,
                          atol=tol, rtol=tol, initial_pieces=8)
        return ang * inner.value

    kink = math.atan(math.sqrt(wx / wyz))
    outer = integrate(lambda th: np.array([radial(t) for t in np.ravel(th)]),
                      0.0, 0.5 * math.pi, atol=tol, rtol=tol, points=[kink])
    # 2 for theta in (pi/2, pi), 2 pi for the azimuth, Gaussian normalization
    mean_abs_det = 2.0 * 2.0 * math.pi * outer.value / (2.0 * math.pi) ** 1.5
    gradient_delta = 1.0 / (2.0 * math.pi * kernel.gradient_variance)
    return mean_abs_det * gradient_delta


def sum_rule_check(kernel, r_max, *, r_min=0.0, tol=1e-10, tail_tol=1e-3, oracle=True):
    """Compare ``2 pi int_{r_min}^{r_max} r C dr`` plus tail with ``-n0``."""
    _require_normalized(kernel)
    if not (r_max > r_min >= 0):
        raise DomainError("need 0 <= r_min < r_max")
    integrand = lambda t: psi_derivative(kernel, t) / (2 * np.pi)  # noqa: E731
    pieces = max(1, int(math.ceil((r_max - r_min) / 2.0)))
    quad = integrate(integrand, r_min, r_max, atol=tol, rtol=tol, initial_pieces=pieces)
    tail = -psi(kernel, r_max) / (2 * np.pi)
    value = quad.value + tail
    n0 = absolute_density(kernel)
    n0_q = absolute_density_oracle(kernel) if oracle else float("nan")
    return SumRuleReport(n0, n0_q, value, abs(value + n0), tail, abs(tail) <= tail_tol)


def two_point_curve(kernel, r_grid, r_switch=R_SWITCH):
    r = _positive(r_grid)
    if r.ndim != 1:
        raise DomainError("r_grid must be one-dimensional")
    tags = tuple("series" if x <= r_switch else "closed_form" for x in r)
    return TwoPointCurve(r, psi(kernel, r, r_switch), charge_correlation(kernel, r, r_switch), tags)
