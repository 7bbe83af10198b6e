r"""Geometry of the four-dimensional two-point manifold and its actions.

Two points ``A, B`` of the plane carry the metric

    g_{i alpha, j beta} = delta_{alpha beta} delta_ij - c_{alpha beta} d_i d_j G(|A - B|),

``c = 1 - delta``.  With ``M = dd G``, ``h = 1 - M^2`` and ``xi = M h^{-1}``
the scalar curvature is

    R = 2 [ (h^ik h^jl - xi_ik xi_jl) T_ijkl - 2 omega / det h + 2 Theta / det h ],
    T_ijkl = G_ijkl + G_ijp G_klq xi_pq,
    omega  = e_ij e_kl G_ikm G_jln h^mn / 2,
    Theta  = e_ij e_kl G_ikm G_jln xi_mn / 2,

with ``G_ijk...`` the partial derivatives of ``G`` and ``e`` the Levi-Civita
symbol.  Two radial functionals are built from the same scalars,

    H = -int D / sqrt(D1 D2) (Z1' + Z2') dr,
    L = -int [ sqrt(D2/D1) Z1' + sqrt(D1/D2) Z2' ] dr,

and ``L`` generates the charge correlation: ``dL/dG(r) = psi'(r)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, DegenerateMetricError, DomainError
from .kernels import BumpFunction, PerturbedKernel
from .numerics import derivative, gauss_legendre, integrate
from .twopoint import (
    _require_normalized,
    _root_det,
    bulk_quantities,
    psi,
    psi_derivative,
    radial_divergence,
)

__all__ = [
    "FourMetricEvaluator",
    "CurvatureReport",
    "ActionValue",
    "VariationalReport",
    "LegendreReport",
    "derivative_tensors",
    "scalar_curvature_closed",
    "scalar_curvature_fd",
    "curvature_report",
    "omega_scalar",
    "einstein_action",
    "einstein_action_full",
    "lagrangian",
    "variational_check",
    "legendre_check",
    "vector_field_potential",
    "independent_component_correlation",
]

LEVI_CIVITA = np.array([[0.0, 1.0], [-1.0, 0.0]])
# kernel-independent boundary content separating the full curvature integral
# from the reduced radial form (r -> 0 limits of the discarded total derivatives)
CURVATURE_BOUNDARY = 8.0 / math.sqrt(3.0) - 2.0


def _hessian_at(kernel, d):
    """``d_i d_j G`` at separation vectors ``d`` (shape ``(..., 2)``)."""
    d = np.asarray(d, dtype=float)
    r = np.linalg.norm(d, axis=-1)
    if np.any(r <= 0):
        raise DomainError("points must be distinct")
    u = d / r[..., None]
    z1 = np.asarray(kernel.eval(r, 2))
    z2 = np.asarray(kernel.eval(r, 1)) / r
    uu = u[..., :, None] * u[..., None, :]
    return z1[..., None, None] * uu + z2[..., None, None] * (np.eye(2) - uu)


@dataclass(frozen=True)
class FourMetricEvaluator:
    kernel: object

    def evaluate(self, point_a, point_b):
        """4x4 metric, coordinate order ``(A_x, A_y, B_x, B_y)``."""
        m = _hessian_at(self.kernel, np.subtract(point_a, point_b))
        eye = np.broadcast_to(np.eye(2), m.shape)
        top = np.concatenate([eye, -m], axis=-1)
        bottom = np.concatenate([-m, eye], axis=-1)
        return np.concatenate([top, bottom], axis=-2)

    def at(self, x):
        x = np.asarray(x, dtype=float)
        return self.evaluate(x[..., :2], x[..., 2:])


@dataclass(frozen=True)
class CurvatureReport:
    r: float
    R_closed: float
    R_fd: float
    abs_diff: float


@dataclass(frozen=True)
class ActionValue:
    value: float
    r_min: float
    r_max: float
    boundary_note: str
    error: float = 0.0


@dataclass(frozen=True)
class VariationalReport:
    """Central-difference functional derivative against ``int psi' eta dr``."""

    dL: float
    expected: float
    residual: float
    lagrangian: float


@dataclass(frozen=True)
class LegendreReport:
    """``lhs = -2 pi int d^2r C G``, ``rhs = H - L``, ``gap = lhs - rhs``."""

    lhs: float
    rhs: float
    gap: float
    H: float
    L: float


def derivative_tensors(kernel, r):
    """Second, third and fourth partial-derivative tensors of ``G`` at ``(r, 0)``."""
    q = bulk_quantities(kernel, r)
    g2 = np.diag([q.Z1, q.Z2])
    g3 = np.zeros((2, 2, 2))
    g3[0, 0, 0] = q.Z1p
    g3[0, 1, 1] = g3[1, 0, 1] = g3[1, 1, 0] = q.Z2p
    g4 = np.zeros((2, 2, 2, 2))
    g4[0, 0, 0, 0] = q.Z1pp
    for idx in [(0, 0, 1, 1), (0, 1, 0, 1), (0, 1, 1, 0), (1, 0, 0, 1), (1, 0, 1, 0), (1, 1, 0, 0)]:
        g4[idx] = q.Z2pp
    g4[1, 1, 1, 1] = 3.0 * q.Z2p / r
    return q, g2, g3, g4


def scalar_curvature_closed(kernel, r):
    """Closed-form scalar curvature of the two-point manifold at separation ``r``."""
    _require_normalized(kernel)
    r = float(r)
    if not r > 0:
        raise DomainError("r must be positive")
    q, g2, g3, g4 = derivative_tensors(kernel, r)
    if not (q.D1 > 0 and q.D2 > 0):
        raise DegenerateMetricError(f"h is singular at r={r:g}")
    h_inv = np.diag([1.0 / q.D1, 1.0 / q.D2])
    det_h = q.D1 * q.D2
    xi = g2 @ h_inv
    e = LEVI_CIVITA
    T = g4 + np.einsum("ijp,klq,pq->ijkl", g3, g3, xi)
    contract = np.einsum("ik,jl,ijkl->", h_inv, h_inv, T) - np.einsum("ik,jl,ijkl->", xi, xi, T)
    omega = 0.5 * np.einsum("ij,kl,ikm,jln,mn->", e, e, g3, g3, h_inv)
    theta = 0.5 * np.einsum("ij,kl,ikm,jln,mn->", e, e, g3, g3, xi)
    return float(2.0 * (contract - 2.0 * omega / det_h + 2.0 * theta / det_h))


def omega_scalar(kernel, r):
    """``omega = Z1'Z2'/D1 - Z2'^2/D2`` at separation ``r``."""
    q = bulk_quantities(kernel, r)
    return q.Z1p * q.Z2p / q.D1 - q.Z2p ** 2 / q.D2


def _christoffel(metric, x, step):
    """``Gamma^a_bc`` at ``x`` from central differences of the metric."""
    g = metric(x)
    dg = np.empty((4, 4, 4))  # dg[c, a, b] = d_c g_ab
    for c in range(4):
        e = np.zeros(4)
        e[c] = step
        dg[c] = (metric(x + e) - metric(x - e)) / (2.0 * step)
    if np.linalg.cond(g) > 1e10:
        raise ConditioningError("metric is ill-conditioned")
    g_inv = np.linalg.inv(g)
    lower = 0.5 * (np.einsum("bdc->dbc", dg) + np.einsum("cdb->dbc", dg) - np.einsum("dbc->dbc", dg))
    # lower[d, b, c] = (d_b g_dc + d_c g_db - d_d g_bc) / 2
    return np.einsum("ad,dbc->abc", g_inv, lower), g_inv


def _riemann_scalar(metric, x, step):
    gam, g_inv = _christoffel(metric, x, step)
    dgam = np.empty((4, 4, 4, 4))  # dgam[c, a, b, d] = d_c Gamma^a_bd
    for c in range(4):
        e = np.zeros(4)
        e[c] = step
        dgam[c] = (_christoffel(metric, x + e, step)[0] - _christoffel(metric, x - e, step)[0]) / (2.0 * step)
    # R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb
    riem = (np.einsum("cadb->abcd", dgam) - np.einsum("dacb->abcd", dgam)
            + np.einsum("ace,edb->abcd", gam, gam) - np.einsum("ade,ecb->abcd", gam, gam))
    ricci = np.einsum("abad->bd", riem)
    return float(np.einsum("bd,bd->", g_inv, ricci))


def scalar_curvature_fd(kernel, point_a, point_b, step=1e-3, *, richardson=True):
    """Scalar curvature from finite-difference Christoffel symbols.

    The metric is differenced in all four coordinates; the Riemann tensor
    follows from differences of the Christoffel symbols plus the quadratic
    terms.  With ``richardson`` the results at ``step`` and ``step/2`` are
    combined to cancel the leading ``O(step^2)`` error.
    """
    _require_normalized(kernel)
    a, b = np.asarray(point_a, dtype=float), np.asarray(point_b, dtype=float)
    if np.linalg.norm(a - b) <= 3 * step:
        raise DomainError("points closer than three steps")
    metric = FourMetricEvaluator(kernel).at
    x = np.concatenate([a, b])
    coarse = _riemann_scalar(metric, x, step)
    if not richardson:
        return coarse
    fine = _riemann_scalar(metric, x, 0.5 * step)
    return fine + (fine - coarse) / 3.0


def curvature_report(kernel, r, step=1e-3, angle=0.0):
    a = np.array([0.0, 0.0])
    b = -r * np.array([math.cos(angle), math.sin(angle)])
    closed = scalar_curvature_closed(kernel, r)
    fd = scalar_curvature_fd(kernel, a, b, step)
    return CurvatureReport(float(r), closed, fd, abs(closed - fd))


def _check_range(r_min, r_max):
    if not (0 <= r_min < r_max and math.isfinite(r_max)):
        raise DomainError("need 0 <= r_min < r_max < inf")


def _hilbert_density(kernel, r):
    q = bulk_quantities(kernel, r)
    return -q.D / _root_det(q) * (q.Z1p + q.Z2p)


def _lagrange_density(kernel, r):
    q = bulk_quantities(kernel, r)
    ratio = np.sqrt(q.D2 / q.D1)
    return -(ratio * q.Z1p + q.Z2p / ratio)


def _quad(density, kernel, r_min, r_max, tol):
    pieces = max(1, int(math.ceil((r_max - r_min) / 2.0)))
    res = integrate(lambda t: density(kernel, t), r_min, r_max, atol=tol, rtol=tol,
                    initial_pieces=pieces)
    return res.value, res.error


def einstein_action(kernel, r_min=0.0, r_max=12.0, *, tol=1e-11):
    """Reduced Einstein action ``-int D/sqrt(D1 D2) (Z1 + Z2)' dr``."""
    _require_normalized(kernel)
    _check_range(r_min, r_max)
    value, err = _quad(_hilbert_density, kernel, r_min, r_max, tol)
    return ActionValue(value, r_min, r_max,
                       "boundary terms at r=0 and r_max dropped (reduced radial form)", err)


def einstein_action_full(kernel, r_min=0.0, r_max=12.0, *, tol=1e-9):
    """``(4 pi)^-1 int d^2r sqrt(det h) R``, i.e. ``int r sqrt(D1 D2) R dr / 2``.

    Differs from :func:`einstein_action` by the boundary terms of the partial
    integrations; for kernels regular at the origin with fast decay this is
    the constant ``CURVATURE_BOUNDARY``.
    """
    _require_normalized(kernel)
    _check_range(r_min, r_max)

    def density(k, t):
        t = np.atleast_1d(t)
        q = bulk_quantities(k, t)
        root = _root_det(q)
        curv = np.array([scalar_curvature_closed(k, x) for x in t])
        return 0.5 * t * root * curv

    # the closed form loses accuracy below r ~ 1e-3; the density is linear
    # there, so the skipped piece is density(lo) * (lo - r_min) / 2 to O(lo^3)
    lo = max(r_min, 1e-3)
    value, err = _quad(density, kernel, lo, r_max, tol)
    if lo > r_min:
        value += 0.5 * float(density(kernel, lo)[0]) * (lo - r_min) * (lo + r_min) / lo
    return ActionValue(value, r_min, r_max, "full curvature integral, boundary terms included", err)


def lagrangian(kernel, r_min=0.0, r_max=12.0, *, tol=1e-11):
    """``L = -int [sqrt(D2/D1) Z1' + sqrt(D1/D2) Z2'] dr``."""
    _require_normalized(kernel)
    _check_range(r_min, r_max)
    value, err = _quad(_lagrange_density, kernel, r_min, r_max, tol)
    return ActionValue(value, r_min, r_max, "boundary terms at r=0 and r_max dropped", err)


def _fixed_lagrangian(kernel, edges, pieces, order):
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += gauss_legendre(lambda t: _lagrange_density(kernel, t), lo, hi,
                                pieces=pieces, order=order)
    return total


def variational_check(kernel, bump_center, bump_width, epsilon, *, r_max=12.0,
                      pieces=64, order=20):
    """Compare ``(L[G + eps eta] - L[G - eps eta]) / (2 eps)`` with ``int psi' eta dr``.

    ``L`` is evaluated on a fixed composite Gauss-Legendre rule whose pieces
    align with the bump support, so both variations share every node.
    """
    _require_normalized(kernel)
    bump = BumpFunction(float(bump_center), float(bump_width))
    lo, hi = bump.support
    if lo <= 0.0 or hi >= r_max:
        raise DomainError("bump support must lie strictly inside (0, r_max)")
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    edges = [0.0, lo, hi, r_max]
    plus = _fixed_lagrangian(PerturbedKernel(kernel, bump, epsilon), edges, pieces, order)
    minus = _fixed_lagrangian(PerturbedKernel(kernel, bump, -epsilon), edges, pieces, order)
    base = _fixed_lagrangian(kernel, edges, pieces, order)
    dL = (plus - minus) / (2.0 * epsilon)
    expected = gauss_legendre(lambda t: psi_derivative(kernel, t) * bump.eval(t), lo, hi,
                              pieces=pieces, order=order)
    return VariationalReport(dL, expected, abs(dL - expected), base)


def legendre_check(kernel, r_max=12.0, *, tol=1e-11):
    """``-2 pi int d^2r C G = -int psi' G dr`` against ``H - L``.

    The two sides differ by boundary contributions; the gap is reported.
    """
    _require_normalized(kernel)
    pieces = max(1, int(math.ceil(r_max / 2.0)))
    lhs = -integrate(lambda t: psi_derivative(kernel, t) * kernel.eval(t, 0), 0.0, r_max,
                     atol=tol, rtol=tol, initial_pieces=pieces).value
    H = einstein_action(kernel, 0.0, r_max, tol=tol).value
    L = lagrangian(kernel, 0.0, r_max, tol=tol).value
    return LegendreReport(lhs, H - L, lhs - (H - L), H, L)


def vector_field_potential(chi, dchi, chi0, point):
    """Potential ``Omega_im`` of an isotropic Gaussian vector field.

    ``chi(point)`` is the 2x2 cross-correlation ``<u_i(x) u_j(0)>``, ``dchi``
    its gradient ``d_k chi_ij`` (shape ``(2, 2, 2)``, derivative index first)
    and ``chi0`` the one-point covariance.  Implements

        Omega_im = e_ij e_mn (det h)^(-1/2) e_ab e_cd d_j chi_ac d_n chi_bd / 2,
        h_ij = <u_i u_m><u_j u_m> - chi_im chi_jm.
    """
    c = np.asarray(chi(point))
    dc = np.asarray(dchi(point))
    c0 = np.asarray(chi0)
    h = c0 @ c0.T - c @ c.T
    det_h = np.linalg.det(h)
    if not det_h > 0:
        raise DegenerateMetricError("vector-field metric is singular")
    e = LEVI_CIVITA
    inner = np.einsum("ab,cd,jac,nbd->jn", e, e, dc, dc)
    return 0.5 * np.einsum("ij,mn,jn->im", e, e, inner) / math.sqrt(det_h)


def independent_component_correlation(G0, kernel, r):
    """``(2 pi)^2 C`` of a vector field with independent components, two ways.

    Each component has correlation ``G(r)`` and variance ``G0``.  Returns
    ``(C_arcsin, C_generic)``: the closed form ``2 K'' K' / r`` with
    ``K = arcsin(G/G0)``, and the general potential with
    ``chi_ij = delta_ij G`` pushed through the radial divergence.
    """
    G0 = float(G0)
    r = float(r)
    if not r > 0:
        raise DomainError("r must be positive")
    g, g1, g2 = (float(kernel.eval(r, k)) for k in range(3))
    if not abs(g) < G0:
        raise DomainError("|G(r)| must be below G(0)")
    w = G0 * G0 - g * g
    k1 = g1 / math.sqrt(w)
    k2 = g2 / math.sqrt(w) + g * g1 * g1 / w ** 1.5
    c_arcsin = 2.0 * k2 * k1 / r / (2 * math.pi) ** 2

    def omega(t):
        t = np.atleast_1d(t)
        out11, out22 = np.empty_like(t), np.empty_like(t)
        for n, x in enumerate(t):
            gx, g1x = float(kernel.eval(x, 0)), float(kernel.eval(x, 1))
            chi = lambda p: gx * np.eye(2)  # noqa: E731
            dchi = lambda p: np.stack([g1x * np.eye(2), np.zeros((2, 2))])  # noqa: E731
            om = vector_field_potential(chi, dchi, G0 * np.eye(2), (x, 0.0))
            out11[n], out22[n] = om[0, 0], om[1, 1]
        return out11, out22

    c_generic = np.asarray(radial_divergence(omega, r)).item() / (2 * math.pi) ** 2
    return c_arcsin, c_generic
