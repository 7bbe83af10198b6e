"""Surface-of-revolution embedding of the wall metric.

The two-dimensional metric ``diag(g_xx(y), g_yy(y))`` is realized as

    X(x, y) = (A(y) cos x, A(y) sin x, B(y)),    A = sqrt(g_xx),
    B'(y) = sqrt(g_yy) sqrt(1 - f(y)^2 / 4),

which exists only where the integrated charge density obeys ``|f| < 2``.
Its Gaussian curvature is half the scalar curvature ``R(y)``.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import EmbeddingError, GeometryError
from .numerics import integrate
from .wallprofile import _heights, charge_density, wall_metric

__all__ = [
    "RevolutionProfile",
    "TriangleMesh",
    "embed_profile",
    "curvature_profile",
    "tessellate",
    "discrete_gaussian_curvature",
]


@dataclass(frozen=True)
class RevolutionProfile:
    y_samples: np.ndarray
    A: np.ndarray
    B: np.ndarray
    valid: np.ndarray


@dataclass(frozen=True)
class TriangleMesh:
    """Triangulated surface.

    ``params`` holds the ``(x, y)`` surface coordinates of every vertex and
    ``meridian_y`` the heights of the gridlines spaced by ``gridline_step``.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    params: np.ndarray
    meridian_y: np.ndarray
    gridline_step: float

    @property
    def n_rings(self):
        return np.unique(self.params[:, 1]).size


def _wall_quantities(kernel, y):
    """``g_xx``, ``g_yy`` and ``f`` with NaN where the metric degenerates."""
    m = wall_metric(kernel, y)
    g_xx, g_yy = np.asarray(m.g_xx, dtype=float), np.asarray(m.g_yy, dtype=float)
    ok = (g_xx > 0) & (g_yy > 0)
    det = np.where(ok, g_xx * g_yy, 1.0)
    f = np.where(ok, -np.asarray(m.dg_xx_dy) / np.sqrt(det), np.nan)
    return g_xx, g_yy, f


def _height_rate(kernel, y):
    g_xx, g_yy, f = _wall_quantities(kernel, y)
    return np.sqrt(np.clip(g_yy, 0.0, None) * np.clip(1.0 - 0.25 * f * f, 0.0, None))


def embed_profile(kernel, y_grid, *, tol=1e-11):
    """Return the meridian curve ``(A(y), B(y))`` sampled on ``y_grid``.

    A sample at ``y = 0`` is accepted for kernels regular at the origin and
    maps to the cone tip ``A = B = 0``.  ``B`` starts at 0 on the wall when
    the kernel is regular there, otherwise at the first valid sample, and is
    held constant across invalid samples.
    """
    y = np.asarray(y_grid, dtype=float)
    if y.ndim != 1 or y.size < 2 or np.any(np.diff(y) <= 0):
        raise GeometryError("y_grid must be a strictly ascending 1-D array of length >= 2")
    at_wall = y == 0.0
    if np.any(at_wall) and kernel.domain_min > 0:
        raise GeometryError("y = 0 lies inside the kernel cutoff")
    inner = _heights(kernel, y[~at_wall])
    g_xx = np.zeros_like(y)
    f = np.full_like(y, np.nan)
    g_xx[~at_wall], _, f[~at_wall] = _wall_quantities(kernel, inner)
    valid = np.where(at_wall, True, (g_xx > 0) & (np.abs(f) < 2.0))
    if not np.any(valid):
        raise EmbeddingError("no sample satisfies |f| < 2; the metric cannot be embedded")
    A = np.full_like(y, np.nan)
    A[valid] = np.sqrt(g_xx[valid])

    rate = lambda t: _height_rate(kernel, t)  # noqa: E731
    B = np.zeros_like(y)
    first = int(np.argmax(valid))
    if kernel.domain_min == 0 and y[first] > 0:
        B[first] = integrate(rate, 0.0, y[first], atol=tol, rtol=tol).value
    for i in range(first + 1, y.size):
        step = 0.0
        if valid[i] and valid[i - 1]:
            step = integrate(rate, y[i - 1], y[i], atol=tol, rtol=tol).value
        B[i] = B[i - 1] + step
    B[:first] = np.nan
    return RevolutionProfile(y, A, B, valid)


def curvature_profile(kernel, y):
    """Scalar curvature ``R(y) = f'(y) (g_xx g_yy)^(-1/2)`` of the wall metric."""
    y = _heights(kernel, y)
    m = wall_metric(kernel, y)
    R = 4 * np.pi * np.asarray(charge_density(kernel, y)) / np.sqrt(np.asarray(m.g_xx * m.g_yy))
    return float(R) if np.ndim(y) == 0 else R


def _valid_run(profile):
    valid = np.asarray(profile.valid, dtype=bool)
    start = int(np.argmax(valid))
    stop = start
    while stop < valid.size and valid[stop]:
        stop += 1
    if np.any(valid[stop:]):
        warnings.warn(f"mesh truncated at y={profile.y_samples[stop - 1]:g}: "
                      "embedding condition |f| < 2 fails beyond", RuntimeWarning, stacklevel=3)
    return start, stop


def tessellate(profile, n_angular, *, gridline_step=0.25):
    """Triangulate the surface ring by ring over the leading valid run.

    Each ring holds ``n_angular`` vertices; a ring with ``A = 0`` collapses to
    a single apex vertex.  Consecutive full rings contribute
    ``2 * n_angular`` triangles, an apex ``n_angular``.
    """
    if int(n_angular) != n_angular or n_angular < 3:
        raise GeometryError("n_angular must be an integer >= 3")
    n = int(n_angular)
    if not gridline_step > 0:
        raise GeometryError("gridline_step must be positive")
    start, stop = _valid_run(profile)
    if stop - start < 2:
        raise GeometryError("need at least two consecutive valid samples")
    ys = profile.y_samples[start:stop]
    A, B = profile.A[start:stop], profile.B[start:stop]
    x = 2 * np.pi * np.arange(n) / n

    vertices, params, rings = [], [], []
    count = 0
    for yi, ai, bi in zip(ys, A, B):
        if ai == 0.0:
            vertices.append([[0.0, 0.0, bi]])
            params.append([[0.0, yi]])
            rings.append(np.array([count]))
            count += 1
        else:
            vertices.append(np.stack([ai * np.cos(x), ai * np.sin(x), np.full(n, bi)], axis=1))
            params.append(np.stack([x, np.full(n, yi)], axis=1))
            rings.append(count + np.arange(n))
            count += n

    tris = []
    j = np.arange(n)
    for lo, hi in zip(rings[:-1], rings[1:]):
        if lo.size == 1 and hi.size == 1:
            continue
        if lo.size == 1:
            tris.append(np.stack([np.full(n, lo[0]), hi[j], hi[(j + 1) % n]], axis=1))
        elif hi.size == 1:
            tris.append(np.stack([lo[j], np.full(n, hi[0]), lo[(j + 1) % n]], axis=1))
        else:
            tris.append(np.stack([lo[j], hi[j], hi[(j + 1) % n]], axis=1))
            tris.append(np.stack([lo[j], hi[(j + 1) % n], lo[(j + 1) % n]], axis=1))
    triangles = np.concatenate(tris).astype(np.int64) if tris else np.zeros((0, 3), np.int64)

    k_lo = int(np.ceil(ys[0] / gridline_step - 1e-9))
    k_hi = int(np.floor(ys[-1] / gridline_step + 1e-9))
    meridian_y = gridline_step * np.arange(k_lo, k_hi + 1)
    return TriangleMesh(np.concatenate(vertices), triangles, np.concatenate(params),
                        meridian_y, float(gridline_step))


def discrete_gaussian_curvature(mesh):
    """Angle deficit over mixed Voronoi area at every vertex.

    Vertices on the mesh boundary get NaN.
    """
    V, T = mesh.vertices, mesh.triangles
    nv = V.shape[0]
    p = [V[T[:, k]] for k in range(3)]
    angles = np.empty((T.shape[0], 3))
    cots = np.empty((T.shape[0], 3))
    for k in range(3):
        u = p[(k + 1) % 3] - p[k]
        v = p[(k + 2) % 3] - p[k]
        cos = np.einsum("ij,ij->i", u, v)
        sin = np.linalg.norm(np.cross(u, v), axis=1)
        angles[:, k] = np.arctan2(sin, cos)
        cots[:, k] = cos / sin
    area = 0.5 * np.linalg.norm(np.cross(p[1] - p[0], p[2] - p[0]), axis=1)

    # mixed area (Meyer et al.): Voronoi for non-obtuse triangles
    mixed = np.empty((T.shape[0], 3))
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        # edge k-i faces the angle at j, edge k-j the angle at i
        e_ki = np.sum((p[i] - p[k]) ** 2, axis=1)
        e_kj = np.sum((p[j] - p[k]) ** 2, axis=1)
        mixed[:, k] = (e_ki * cots[:, j] + e_kj * cots[:, i]) / 8.0
    obtuse = angles.max(axis=1) > 0.5 * np.pi
    for k in range(3):
        at_k = angles[:, k] > 0.5 * np.pi
        mixed[obtuse, k] = np.where(at_k[obtuse], area[obtuse] / 2, area[obtuse] / 4)

    angle_sum = np.zeros(nv)
    area_sum = np.zeros(nv)
    for k in range(3):
        np.add.at(angle_sum, T[:, k], angles[:, k])
        np.add.at(area_sum, T[:, k], mixed[:, k])

    # boundary vertices sit on edges used by a single triangle
    edges = np.sort(np.concatenate([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]]), axis=1)
    uniq, counts = np.unique(edges, axis=0, return_counts=True)
    boundary = np.zeros(nv, dtype=bool)
    boundary[uniq[counts == 1].ravel()] = True

    with np.errstate(divide="ignore", invalid="ignore"):
        K = (2 * np.pi - angle_sum) / area_sum
    K[boundary | (area_sum == 0)] = np.nan
    return K
