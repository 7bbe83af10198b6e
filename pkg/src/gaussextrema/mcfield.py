"""Monte Carlo oracle: random-wave fields, their extrema, and estimators.

A bulk realization is a superposition of ``N`` unit-wavenumber plane waves,

    phi(x) = sqrt(2/N) sum_n cos(k_n . x + theta_n),

whose correlation is exactly ``J_0(r)``.  The Dirichlet half-space field is
the antisymmetrized combination ``(phi(x, y) - phi(x, -y)) / sqrt 2``, which
collapses to the separable form ``-(2/sqrt N) sum_n sin(k_nx x + theta_n)
sin(k_ny y)`` and therefore vanishes identically on ``y = 0``.

Every realization draws from its own counter-based stream keyed by
``(seed, realization_index)``, so results do not depend on the order or the
process in which realizations are generated.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from .errors import GeometryError

__all__ = [
    "WaveEnsembleSpec",
    "FieldRealization",
    "ExtremumRecord",
    "ExtremumSet",
    "EstimatorOutput",
    "sample_realization",
    "locate_extrema",
    "find_extrema",
    "collect_extrema",
    "estimate_kernel",
    "estimate_signed_density",
    "estimate_wall_profile",
    "estimate_pair_correlation",
]

MAX_NEWTON_ITERATIONS = 50


@dataclass(frozen=True)
class WaveEnsembleSpec:
    """Ensemble definition.

    ``domain`` is ``(x_min, x_max, y_min, y_max)`` and ``grid`` the number of
    coarse-grid nodes along each axis used to seed the extremum search.
    """

    n_waves: int = 256
    n_realizations: int = 100
    seed: int = 0
    domain: tuple = (0.0, 40.0, 0.0, 40.0)
    grid: tuple = (201, 201)
    half_space: bool = False
    newton_tol: float = 1e-10

    def __post_init__(self):
        if int(self.n_waves) != self.n_waves or self.n_waves < 64:
            raise GeometryError("n_waves must be an integer >= 64")
        if int(self.n_realizations) != self.n_realizations or self.n_realizations < 1:
            raise GeometryError("n_realizations must be a positive integer")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise GeometryError("seed must fit in 64 bits")
        x0, x1, y0, y1 = self.domain
        if not (x1 > x0 and y1 > y0):
            raise GeometryError("domain must have positive area")
        if self.half_space and y0 != 0.0:
            raise GeometryError("half-space domains start at the wall y = 0")
        nx, ny = self.grid
        if nx < 32 or ny < 32:
            raise GeometryError("grid must be at least 32 x 32")
        if max(self.spacing) >= math.pi / 4:
            raise GeometryError("coarse grid spacing must stay below pi/4")

    @property
    def spacing(self):
        x0, x1, y0, y1 = self.domain
        nx, ny = self.grid
        return (x1 - x0) / (nx - 1), (y1 - y0) / (ny - 1)

    @property
    def area(self):
        x0, x1, y0, y1 = self.domain
        return (x1 - x0) * (y1 - y0)


@dataclass(frozen=True)
class FieldRealization:
    """One field sample with analytic value, gradient and Hessian."""

    k: np.ndarray
    theta: np.ndarray
    half_space: bool = False
    amplitude: float = 1.0

    @property
    def n_waves(self):
        return self.theta.size

    @property
    def weight(self):
        n = self.n_waves
        return self.amplitude * (2.0 / math.sqrt(n) if self.half_space else math.sqrt(2.0 / n))

    def scaled(self, factor):
        return replace(self, amplitude=self.amplitude * factor)

    def _trig(self, x, y):
        x = np.asarray(x, dtype=float)[..., None]
        y = np.asarray(y, dtype=float)[..., None]
        kx, ky = self.k[:, 0], self.k[:, 1]
        if self.half_space:
            ax = kx * x + self.theta
            ay = ky * y
            return np.sin(ax), np.cos(ax), np.sin(ay), np.cos(ay)
        phase = kx * x + ky * y + self.theta
        return np.cos(phase), np.sin(phase)

    def value(self, x, y):
        w = self.weight
        if self.half_space:
            sx, _, sy, _ = self._trig(x, y)
            return -w * np.sum(sx * sy, axis=-1)
        c, _ = self._trig(x, y)
        return w * np.sum(c, axis=-1)

    def derivatives(self, x, y):
        """Gradient ``(fx, fy)`` and Hessian ``(fxx, fxy, fyy)``."""
        w = self.weight
        kx, ky = self.k[:, 0], self.k[:, 1]
        if self.half_space:
            sx, cx, sy, cy = self._trig(x, y)
            fx = -w * np.sum(kx * cx * sy, axis=-1)
            fy = -w * np.sum(ky * sx * cy, axis=-1)
            fxx = w * np.sum(kx * kx * sx * sy, axis=-1)
            fxy = -w * np.sum(kx * ky * cx * cy, axis=-1)
            fyy = w * np.sum(ky * ky * sx * sy, axis=-1)
        else:
            c, s = self._trig(x, y)
            fx = -w * np.sum(kx * s, axis=-1)
            fy = -w * np.sum(ky * s, axis=-1)
            fxx = -w * np.sum(kx * kx * c, axis=-1)
            fxy = -w * np.sum(kx * ky * c, axis=-1)
            fyy = -w * np.sum(ky * ky * c, axis=-1)
        return (fx, fy), (fxx, fxy, fyy)

    def grid_gradient(self, xs, ys):
        """Gradient on the tensor grid ``xs x ys`` via separable products."""
        w = self.weight
        kx, ky = self.k[:, 0], self.k[:, 1]
        if self.half_space:
            ax = np.outer(xs, kx) + self.theta
            ay = np.outer(ys, ky)
            sx, cx, sy, cy = np.sin(ax), np.cos(ax), np.sin(ay), np.cos(ay)
            fx = -w * ((cx * kx) @ sy.T)
            fy = -w * (sx @ (cy * ky).T)
            return fx, fy
        ex = np.exp(1j * (np.outer(xs, kx) + self.theta))
        ey = np.exp(1j * np.outer(ys, ky))
        fx = -w * ((ex * kx) @ ey.T).imag
        fy = -w * (ex @ (ey * ky).T).imag
        return fx, fy


@dataclass(frozen=True)
class ExtremumRecord:
    position: np.ndarray
    charge: int
    hessian_det: float
    refine_iterations: int


@dataclass(frozen=True)
class ExtremumSet:
    """Extrema of one realization as parallel arrays plus search diagnostics."""

    positions: np.ndarray
    charges: np.ndarray
    hessian_dets: np.ndarray
    iterations: np.ndarray
    n_seeds: int = 0
    n_failed: int = 0

    def records(self):
        return [ExtremumRecord(p.copy(), int(q), float(d), int(i))
                for p, q, d, i in zip(self.positions, self.charges, self.hessian_dets, self.iterations)]


@dataclass(frozen=True)
class EstimatorOutput:
    bin_centers: np.ndarray
    means: np.ndarray
    standard_errors: np.ndarray
    n_samples: np.ndarray
    expected: np.ndarray = field(default=None)
    flags: tuple = ()


def sample_realization(spec, realization_index):
    """Draw wave directions and phases from the stream ``(seed, index)``."""
    bitgen = np.random.Philox(key=[int(spec.seed), int(realization_index)])
    rng = np.random.Generator(bitgen)
    angles = rng.uniform(0.0, 2.0 * np.pi, spec.n_waves)
    theta = rng.uniform(0.0, 2.0 * np.pi, spec.n_waves)
    k = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return FieldRealization(k, theta, bool(spec.half_space))


def _seed_cells(fx, fy):
    """Lower-left indices of cells where both gradient components change sign."""
    def changes(f):
        corners = np.stack([f[:-1, :-1], f[1:, :-1], f[:-1, 1:], f[1:, 1:]])
        return (corners.min(axis=0) <= 0) & (corners.max(axis=0) >= 0)
    return np.nonzero(changes(fx) & changes(fy))


def _newton(realization, p, tol, max_iter=MAX_NEWTON_ITERATIONS):
    """Vectorized Newton iteration on the gradient.

    The 2x2 solve is written out explicitly so that scaling the field by a
    power of two scales every intermediate exactly and leaves the iterates
    bit-identical.
    """
    p = p.copy()
    active = np.ones(len(p), dtype=bool)
    iters = np.zeros(len(p), dtype=np.int64)
    dets = np.zeros(len(p))
    for _ in range(max_iter):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        (gx, gy), (hxx, hxy, hyy) = realization.derivatives(p[idx, 0], p[idx, 1])
        det = hxx * hyy - hxy * hxy
        with np.errstate(divide="ignore", invalid="ignore"):
            dx = -(hyy * gx - hxy * gy) / det
            dy = -(hxx * gy - hxy * gx) / det
        p[idx, 0] += dx
        p[idx, 1] += dy
        iters[idx] += 1
        dets[idx] = det
        done = np.hypot(dx, dy) < tol
        bad = ~np.isfinite(dx) | ~np.isfinite(dy)
        active[idx[done | bad]] = False
        p[idx[bad]] = np.nan
    converged = ~active & np.all(np.isfinite(p), axis=1)
    return p, dets, iters, converged


def locate_extrema(realization, region, grid, newton_tol=1e-10, *, keep_margin=None):
    """Find all extrema of ``realization`` inside ``region``.

    ``region`` is ``(x_min, x_max, y_min, y_max)`` and ``grid`` the number of
    coarse nodes per axis.  Cells whose four corners bracket zero in both
    gradient components seed a Newton refinement.  Converged points are
    merged within ``1e-6``, and only points at least ``keep_margin`` (default
    one cell) inside the region are kept; for half-space fields the wall side
    keeps everything above ``y = 1e-8``.
    """
    x0, x1, y0, y1 = region
    nx, ny = grid
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    hx, hy = xs[1] - xs[0], ys[1] - ys[0]
    if max(hx, hy) >= math.pi / 4:
        raise GeometryError("coarse grid spacing must stay below pi/4")
    margin = max(hx, hy) if keep_margin is None else keep_margin

    fx, fy = realization.grid_gradient(xs, ys)
    ix, iy = _seed_cells(fx, fy)
    seeds = np.stack([xs[ix] + 0.5 * hx, ys[iy] + 0.5 * hy], axis=1)
    p, dets, iters, ok = _newton(realization, seeds, newton_tol)
    n_failed = int(np.count_nonzero(~ok))

    p, dets, iters = p[ok], dets[ok], iters[ok]
    y_lo = 1e-8 if realization.half_space else y0 + margin
    inside = ((p[:, 0] >= x0 + margin) & (p[:, 0] <= x1 - margin)
              & (p[:, 1] >= y_lo) & (p[:, 1] <= y1 - margin))
    p, dets, iters = p[inside], dets[inside], iters[inside]

    if len(p):
        # keep the first of every cluster of coincident solutions
        order = np.lexsort((p[:, 1], p[:, 0]))
        p, dets, iters = p[order], dets[order], iters[order]
        tree = cKDTree(p)
        keep = np.ones(len(p), dtype=bool)
        for i, j in sorted(tree.query_pairs(1e-6)):
            if keep[i]:
                keep[j] = False
        p, dets, iters = p[keep], dets[keep], iters[keep]
    charges = np.sign(dets).astype(np.int64)
    return ExtremumSet(p, charges, dets, iters, n_seeds=len(seeds), n_failed=n_failed)


def find_extrema(realization, region, coarse_grid, newton_tol=1e-10):
    """List of :class:`ExtremumRecord` inside ``region``."""
    return locate_extrema(realization, region, coarse_grid, newton_tol).records()


def _collect_one(args):
    spec, index = args
    realization = sample_realization(spec, index)
    return locate_extrema(realization, spec.domain, spec.grid, spec.newton_tol)


def _map(func, items, workers):
    if workers is None or workers <= 1:
        return [func(item) for item in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items, chunksize=chunk))


def collect_extrema(spec, workers=1):
    """Extrema of every realization, in realization order."""
    return _map(_collect_one, [(spec, i) for i in range(spec.n_realizations)], workers)


def _summarize(per_realization):
    """Mean and standard error across realizations (rows)."""
    data = np.asarray(per_realization, dtype=float)
    n = np.sum(np.isfinite(data), axis=0)
    mean = np.nanmean(data, axis=0)
    se = np.full(mean.shape, np.nan)
    ok = n > 1
    if np.any(ok):
        se[ok] = np.nanstd(data[:, ok], axis=0, ddof=1) / np.sqrt(n[ok])
    return mean, se, n


def _kernel_one(args):
    spec, index, radii, y_ref, n_points = args
    f = sample_realization(spec, index)
    x0, x1, y0, y1 = spec.domain
    xs = np.linspace(x0, x1 - max(radii), n_points)
    if spec.half_space:
        ys = np.full(1, y_ref)
    else:
        ys = np.linspace(y0, y1, n_points)
    X, Y = (a.ravel() for a in np.meshgrid(xs, ys))
    base = f.value(X, Y)
    return [np.mean(base * f.value(X + r, Y)) for r in radii]


def estimate_kernel(spec, radii=(0.0, 0.5, 1.0, 2.0, 5.0), *, y_ref=2.0, n_points=16, workers=1):
    """Empirical ``<phi(p) phi(p + r e_x)>`` with its expectation.

    In the bulk the base points ``p`` form an ``n_points`` square lattice and
    the expectation is ``J_0(r)``.  In the half space they lie on the line
    ``y = y_ref`` and the expectation is
    ``J_0(r) - J_0(sqrt(r^2 + 4 y_ref^2))``.
    """
    from .specfun import jn

    radii = np.asarray(radii, dtype=float)
    rows = _map(_kernel_one, [(spec, i, radii, y_ref, n_points)
                              for i in range(spec.n_realizations)], workers)
    mean, se, n = _summarize(rows)
    expected = jn(0, radii)
    if spec.half_space:
        expected = expected - jn(0, np.sqrt(radii ** 2 + 4 * y_ref ** 2))
    return EstimatorOutput(radii, mean, se, n, expected)


def _counting_area(spec, margin):
    x0, x1, y0, y1 = spec.domain
    bottom = 0.0 if spec.half_space else margin
    return (x1 - x0 - 2 * margin) * (y1 - y0 - margin - bottom)


def estimate_signed_density(spec, extrema=None, *, workers=1):
    """Signed and absolute extremum densities per unit area.

    The two entries are labelled by ``bin_centers`` 0 (signed) and 1 (absolute).
    """
    if extrema is None:
        extrema = collect_extrema(spec, workers)
    margin = max(spec.spacing)
    area = _counting_area(spec, margin)
    rows = [[s.charges.sum() / area, s.charges.size / area] for s in extrema]
    mean, se, n = _summarize(rows)
    return EstimatorOutput(np.array([0.0, 1.0]), mean, se, n)


def estimate_wall_profile(spec, y_bins, extrema=None, *, workers=1):
    """Signed charge per unit area in slabs ``y_bins[i] < y <= y_bins[i+1]``."""
    if not spec.half_space:
        raise GeometryError("wall profile needs a half-space ensemble")
    y_bins = np.asarray(y_bins, dtype=float)
    if spec.domain[3] - spec.domain[2] < 8:
        raise GeometryError("domain y-extent must be at least 8")
    margin = max(spec.spacing)
    if y_bins[-1] > spec.domain[3] - margin:
        raise GeometryError("y_bins extend beyond the counting region")
    x0, x1 = spec.domain[:2]
    width = x1 - x0 - 2 * margin
    if extrema is None:
        extrema = collect_extrema(spec, workers)
    rows, counts = [], np.zeros(len(y_bins) - 1, dtype=np.int64)
    for s in extrema:
        idx = np.searchsorted(y_bins, s.positions[:, 1], side="left") - 1
        ok = (idx >= 0) & (idx < len(y_bins) - 1)
        sums = np.bincount(idx[ok], weights=s.charges[ok], minlength=len(y_bins) - 1)
        counts += np.bincount(idx[ok], minlength=len(y_bins) - 1)
        rows.append(sums / (width * np.diff(y_bins)))
    mean, se, n = _summarize(rows)
    flags = tuple(f"empty bin {i}" for i in np.nonzero(counts == 0)[0])
    return EstimatorOutput(0.5 * (y_bins[1:] + y_bins[:-1]), mean, se, n, flags=flags)


def estimate_pair_correlation(spec, r_bins, r_max=None, extrema=None, *, workers=1):
    """Charge-charge correlation ``C(r)`` from annulus counts.

    Centers are restricted to the counting region shrunk by ``r_max`` so every
    annulus lies inside it; the estimate per realization is
    ``sum q_i q_j / (A_centers * pi (r_b^2 - r_a^2))``.
    """
    if spec.half_space:
        raise GeometryError("pair correlation needs a bulk ensemble")
    r_bins = np.asarray(r_bins, dtype=float)
    r_max = float(r_bins[-1]) if r_max is None else float(r_max)
    if r_bins[-1] > r_max:
        raise GeometryError("r_bins exceed r_max")
    x0, x1, y0, y1 = spec.domain
    if r_max > min(x1 - x0, y1 - y0) / 3:
        raise GeometryError("r_max must not exceed a third of the domain")
    if extrema is None:
        extrema = collect_extrema(spec, workers)
    margin = max(spec.spacing)
    cx0, cx1, cy0, cy1 = x0 + margin + r_max, x1 - margin - r_max, y0 + margin + r_max, y1 - margin - r_max
    center_area = (cx1 - cx0) * (cy1 - cy0)
    annulus = np.pi * np.diff(r_bins ** 2)
    rows = []
    for s in extrema:
        p, q = s.positions, s.charges
        centre = (p[:, 0] >= cx0) & (p[:, 0] <= cx1) & (p[:, 1] >= cy0) & (p[:, 1] <= cy1)
        tree = cKDTree(p)
        pairs = tree.query_pairs(r_max, output_type="ndarray")
        i, j = pairs[:, 0], pairs[:, 1]
        d = np.linalg.norm(p[i] - p[j], axis=1)
        idx = np.searchsorted(r_bins, d, side="right") - 1
        ok = (idx >= 0) & (idx < len(r_bins) - 1)
        qq = (q[i] * q[j]).astype(float)
        # each unordered pair contributes once per end that is a valid centre
        w = qq * (centre[i].astype(float) + centre[j].astype(float))
        sums = np.bincount(idx[ok], weights=w[ok], minlength=len(r_bins) - 1)
        rows.append(sums / (center_area * annulus))
    mean, se, n = _summarize(rows)
    return EstimatorOutput(0.5 * (r_bins[1:] + r_bins[:-1]), mean, se, n)
