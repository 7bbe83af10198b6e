"""Radial correlation functions ``G(r)`` with analytic derivatives to order 4.

A kernel is the only model input: every wall, two-point and action quantity
is assembled from ``G`` and its first four radial derivatives.  Besides plain
evaluation, kernels expose two cancellation-free combinations that the
downstream formulas need near the origin, where ``G''(r)`` and ``G'(r)/r``
both approach ``G''(0)``:

* :meth:`RadialKernel.hessian_excess` returns ``(G''(r) - G''(0),
  G'(r)/r - G''(0))``;
* :meth:`RadialKernel.hessian_split` returns ``G''(r) - G'(r)/r``.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import CutoffError, DomainError, UnsupportedKernelError
from .specfun import (
    half_minus_j1_over_x,
    j0_derivative,
    j0_second_derivative_excess,
    jn,
    kn,
)

__all__ = [
    "RadialKernel",
    "RandomWaveKernel",
    "MembraneKernel",
    "GaussianKernel",
    "ScaledKernel",
    "PerturbedKernel",
    "BumpFunction",
    "TaylorCoefficients",
    "KernelConfig",
    "make_random_wave",
    "make_membrane",
    "make_gaussian",
    "make_kernel",
    "normalize",
    "taylor_coefficients",
]

KERNEL_KINDS = ("random_wave", "membrane", "gaussian")


def _radius(r, domain_min=0.0):
    r = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(r)):
        raise DomainError("kernel argument must be finite")
    if np.any(r < 0):
        raise DomainError("kernel argument must be non-negative")
    if domain_min > 0 and np.any(r < domain_min):
        raise CutoffError(f"r below the cutoff a={domain_min:g}")
    return r


def _check_order(order):
    if order not in range(5):
        raise DomainError(f"derivative order must be 0..4, got {order}")


class RadialKernel(ABC):
    """Isotropic correlation function ``G(r)``.

    Subclasses implement :meth:`eval` for orders 0 to 4.  The defaults of the
    remaining methods are assembled from :meth:`eval` and are overridden where
    a cancellation-free form exists.
    """

    label = "kernel"
    domain_min = 0.0

    @abstractmethod
    def eval(self, r, order=0):
        """``d^order G / dr^order`` at ``r`` (array-valued)."""

    def zero_derivatives(self):
        """Even derivatives ``{2: G''(0), 4: G''''(0), ...}`` or ``None``.

        ``None`` means the kernel is singular at the origin or provides no
        closed form.
        """
        return None

    @property
    def gradient_variance(self):
        """``-G''(0)``, the variance of each gradient component."""
        z = self.zero_derivatives()
        if z is None:
            return float(-self.eval(0.0, 2))
        return float(-z[2])

    def hessian_excess(self, r):
        r = _radius(r, self.domain_min)
        g2 = -self.gradient_variance
        return self.eval(r, 2) - g2, self.eval(r, 1) / r - g2

    def hessian_split(self, r):
        r = _radius(r, self.domain_min)
        return self.eval(r, 2) - self.eval(r, 1) / r

    def __call__(self, r):
        return self.eval(r, 0)


@dataclass(frozen=True)
class RandomWaveKernel(RadialKernel):
    """``G(r) = amplitude * J_0(r)``, unit wavenumber."""

    amplitude: float = 1.0

    def __post_init__(self):
        if not (self.amplitude > 0 and math.isfinite(self.amplitude)):
            raise DomainError("random-wave amplitude must be positive")

    @property
    def label(self):
        return f"random_wave(amplitude={self.amplitude:g})"

    def eval(self, r, order=0):
        _check_order(order)
        return self.amplitude * j0_derivative(_radius(r), order)

    def zero_derivatives(self):
        a = self.amplitude
        return {2 * m: a * (-1) ** m * math.factorial(2 * m) / (4 ** m * math.factorial(m) ** 2)
                for m in range(1, 6)}

    def hessian_excess(self, r):
        r = _radius(r)
        return (self.amplitude * j0_second_derivative_excess(r),
                self.amplitude * half_minus_j1_over_x(r))

    def hessian_split(self, r):
        return self.amplitude * jn(2, _radius(r))


@dataclass(frozen=True)
class GaussianKernel(RadialKernel):
    """``G(r) = exp(-r^2/2)``."""

    label = "gaussian"

    def eval(self, r, order=0):
        _check_order(order)
        r = _radius(r)
        e = np.exp(-0.5 * r * r)
        poly = (1.0, -r, r * r - 1.0, 3.0 * r - r ** 3, r ** 4 - 6.0 * r * r + 3.0)[order]
        return poly * e

    def zero_derivatives(self):
        # G^(2m)(0) = (-1)^m (2m)! / (2^m m!)
        return {2 * m: (-1) ** m * math.factorial(2 * m) / (2 ** m * math.factorial(m))
                for m in range(1, 6)}

    def hessian_excess(self, r):
        r = _radius(r)
        em1 = -np.expm1(-0.5 * r * r)
        return r * r * np.exp(-0.5 * r * r) + em1, em1

    def hessian_split(self, r):
        r = _radius(r)
        return r * r * np.exp(-0.5 * r * r)


@dataclass(frozen=True)
class MembraneKernel(RadialKernel):
    """Regularized membrane height correlation ``G(r) = -log r - K_0(r)``.

    The additive constant is dropped.  ``G''(0)`` diverges logarithmically,
    so the gradient variance ``B`` is a parameter standing for the value
    regularized at the cutoff ``cutoff_a``; evaluation below the cutoff is
    refused.
    """

    B: float = 1.0
    cutoff_a: float = 0.01

    def __post_init__(self):
        if not (self.B > 0 and math.isfinite(self.B)):
            raise DomainError("membrane B must be positive")
        if not (self.cutoff_a > 0 and math.isfinite(self.cutoff_a)):
            raise DomainError("membrane cutoff must be positive")

    @property
    def label(self):
        return f"membrane(B={self.B:g}, a={self.cutoff_a:g})"

    @property
    def domain_min(self):
        return self.cutoff_a

    @property
    def gradient_variance(self):
        return float(self.B)

    def eval(self, r, order=0):
        _check_order(order)
        r = _radius(r, self.cutoff_a)
        k0, k1 = kn(0, r), kn(1, r)
        if order == 0:
            return -np.log(r) - k0
        if order == 1:
            return k1 - 1.0 / r
        if order == 2:
            return -k0 - k1 / r + r ** -2
        if order == 3:
            return (1.0 + 2.0 / r ** 2) * k1 + k0 / r - 2.0 / r ** 3
        return (-1.0 - 3.0 / r ** 2) * k0 + (-2.0 / r - 6.0 / r ** 3) * k1 + 6.0 / r ** 4

    def hessian_excess(self, r):
        r = _radius(r, self.cutoff_a)
        return self.B + self.eval(r, 2), self.B + self.eval(r, 1) / r

    def hessian_split(self, r):
        r = _radius(r, self.cutoff_a)
        return 2.0 / r ** 2 - kn(2, r)


@dataclass(frozen=True)
class ScaledKernel(RadialKernel):
    """``factor * base``."""

    base: RadialKernel
    factor: float

    @property
    def label(self):
        return f"{self.factor:g}*{self.base.label}"

    @property
    def domain_min(self):
        return self.base.domain_min

    @property
    def gradient_variance(self):
        return self.factor * self.base.gradient_variance

    def eval(self, r, order=0):
        return self.factor * self.base.eval(r, order)

    def zero_derivatives(self):
        z = self.base.zero_derivatives()
        return None if z is None else {k: self.factor * v for k, v in z.items()}

    def hessian_excess(self, r):
        e1, e2 = self.base.hessian_excess(r)
        return self.factor * e1, self.factor * e2

    def hessian_split(self, r):
        return self.factor * self.base.hessian_split(r)


def _bump_polynomials(count):
    # eta^(k)(t) = P_k(t) (1 - t^2)^(-2k) exp(-1/(1 - t^2))
    one_minus = np.array([1.0, 0.0, -1.0])
    polys = [np.array([1.0])]
    for k in range(count - 1):
        pk = polys[-1]
        nxt = P.polymul(P.polyder(pk), P.polymul(one_minus, one_minus))
        nxt = P.polyadd(nxt, P.polymul(P.polymul([0.0, 4.0 * k], pk), one_minus))
        nxt = P.polyadd(nxt, P.polymul([0.0, -2.0], pk))
        polys.append(nxt)
    return polys


_BUMP_POLYS = _bump_polynomials(5)


@dataclass(frozen=True)
class BumpFunction:
    """Smooth compactly supported bump ``exp(-1/(1 - t^2))``, ``t = (r-center)/width``."""

    center: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise DomainError("bump width must be positive")

    @property
    def support(self):
        return self.center - self.width, self.center + self.width

    def eval(self, r, order=0):
        _check_order(order)
        r = np.asarray(r, dtype=float)
        t = (r - self.center) / self.width
        inside = np.abs(t) < 1.0
        u = np.where(inside, 1.0 - t * t, 1.0)
        log_mag = -1.0 / u - 2 * order * np.log(u)
        val = P.polyval(t, _BUMP_POLYS[order]) * np.exp(log_mag) / self.width ** order
        return np.where(inside, val, 0.0)


@dataclass(frozen=True)
class PerturbedKernel(RadialKernel):
    """``base + epsilon * bump``; the bump must stay away from the origin."""

    base: RadialKernel
    bump: BumpFunction
    epsilon: float

    def __post_init__(self):
        if self.bump.support[0] <= 0:
            raise DomainError("bump support must exclude r = 0")

    @property
    def label(self):
        return f"{self.base.label}+{self.epsilon:g}*bump"

    @property
    def domain_min(self):
        return self.base.domain_min

    @property
    def gradient_variance(self):
        return self.base.gradient_variance

    def zero_derivatives(self):
        return self.base.zero_derivatives()

    def eval(self, r, order=0):
        return self.base.eval(r, order) + self.epsilon * self.bump.eval(r, order)

    def hessian_excess(self, r):
        r = np.asarray(r, dtype=float)
        e1, e2 = self.base.hessian_excess(r)
        d1, d2 = self.bump.eval(r, 1), self.bump.eval(r, 2)
        safe = np.where(r > 0, r, 1.0)
        return e1 + self.epsilon * d2, e2 + self.epsilon * np.where(r > 0, d1 / safe, 0.0)

    def hessian_split(self, r):
        r = np.asarray(r, dtype=float)
        d1, d2 = self.bump.eval(r, 1), self.bump.eval(r, 2)
        safe = np.where(r > 0, r, 1.0)
        return self.base.hessian_split(r) + self.epsilon * (d2 - np.where(r > 0, d1 / safe, 0.0))


@dataclass(frozen=True)
class TaylorCoefficients:
    """Even Taylor data of ``G`` at the origin.

    ``b = G''''(0)``, ``c = -G^(6)(0)``, ``d = G^(8)(0)``, ``e = -G^(10)(0)``
    and ``normalization = -G''(0)``.
    """

    b: float
    c: float
    d: float
    e: float
    normalization: float

    def __post_init__(self):
        if not (self.b > 0 and self.c > 0):
            raise DomainError("Taylor coefficients b and c must be positive")


@dataclass(frozen=True)
class KernelConfig:
    kind: str = "random_wave"
    amplitude: float = 1.0
    B: float = 1.0
    cutoff_a: float = 0.01

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise DomainError(f"unknown kernel kind {self.kind!r}; expected one of {KERNEL_KINDS}")
        if not self.amplitude > 0:
            raise DomainError("amplitude must be positive")
        if self.kind == "membrane" and not (self.B > 0 and self.cutoff_a > 0):
            raise DomainError("membrane requires B > 0 and cutoff_a > 0")


def make_random_wave(amplitude=1.0):
    return RandomWaveKernel(float(amplitude))


def make_membrane(B=1.0, cutoff_a=0.01):
    return MembraneKernel(float(B), float(cutoff_a))


def make_gaussian():
    return GaussianKernel()


def make_kernel(config):
    """Build the kernel described by a :class:`KernelConfig`."""
    if config.kind == "random_wave":
        return make_random_wave(config.amplitude)
    if config.kind == "membrane":
        return make_membrane(config.B, config.cutoff_a)
    kernel = make_gaussian()
    if config.amplitude != 1.0:
        kernel = ScaledKernel(kernel, float(config.amplitude))
    return kernel


def normalize(kernel):
    """Rescale the amplitude so that ``-G''(0) = 1``."""
    gv = kernel.gradient_variance
    if not gv > 0:
        raise DomainError("kernel has non-positive gradient variance")
    if gv == 1.0:
        return kernel
    return ScaledKernel(kernel, 1.0 / gv)


def taylor_coefficients(kernel, h_max=0.4, n_samples=24):
    """Return :class:`TaylorCoefficients` of a kernel smooth at the origin.

    Closed forms are used when the kernel provides them.  Otherwise the even
    function ``G''''(h) = b - c h^2/2 + d h^4/24 - e h^6/720 + ...`` is fitted
    by least squares in powers of ``h^2`` on ``(0, h_max]``.
    """
    if kernel.domain_min > 0:
        raise UnsupportedKernelError(f"{kernel.label} is singular at the origin")
    z = kernel.zero_derivatives()
    if z is not None and all(k in z for k in (2, 4, 6, 8, 10)):
        return TaylorCoefficients(b=z[4], c=-z[6], d=z[8], e=-z[10], normalization=-z[2])
    h = np.linspace(h_max / n_samples, h_max, n_samples)
    g4 = kernel.eval(h, 4)
    basis = np.stack([h ** (2 * k) for k in range(6)], axis=1)
    coef = np.linalg.lstsq(basis, g4, rcond=None)[0]
    b, c, d, e = coef[0], -2.0 * coef[1], 24.0 * coef[2], -720.0 * coef[3]
    return TaylorCoefficients(b=float(b), c=float(c), d=float(d), e=float(e),
                              normalization=float(-kernel.eval(0.0, 2)))
