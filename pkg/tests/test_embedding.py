import math
import warnings

import numpy as np
import pytest

from gaussextrema.embedding import (
    RevolutionProfile,
    curvature_profile,
    discrete_gaussian_curvature,
    embed_profile,
    tessellate,
)
from gaussextrema.errors import EmbeddingError, GeometryError
from gaussextrema.kernels import make_membrane, make_random_wave
from gaussextrema.wallprofile import charge_density, integrated_charge, wall_metric

RW = make_random_wave(1.0)


def ring_curvature_error(n):
    """Largest |K_discrete - R/2| over interior vertices with y in [0.5, 6]."""
    prof = embed_profile(RW, np.linspace(0.0, 7.0, n + 1))
    mesh = tessellate(prof, n)
    K = discrete_gaussian_curvature(mesh)
    ys, inverse = np.unique(mesh.params[:, 1], return_inverse=True)
    half_R = np.full(ys.shape, np.nan)
    inside = (ys >= 0.5) & (ys <= 6.0)
    half_R[inside] = 0.5 * curvature_profile(RW, ys[inside])
    target = half_R[inverse]
    sel = np.isfinite(target) & np.isfinite(K)
    return np.abs(K[sel] - target[sel]), np.abs(target[sel])


def test_cone_tip_asymptotics():
    prof = embed_profile(RW, np.array([0.0, 1e-3, 2e-3]))
    y = 1e-3
    assert prof.A[1] / (y / 2) == pytest.approx(1.0, abs=1e-3)
    assert prof.B[1] / (math.sqrt(3) * y / 2) == pytest.approx(1.0, abs=1e-3)
    assert prof.A[0] == 0.0 and prof.B[0] == 0.0


def test_profile_invariants():
    y = np.linspace(0.0, 7.0, 141)
    prof = embed_profile(RW, y)
    assert np.all(prof.valid)  # |f| < 2 on (0, 7]
    assert np.all(np.diff(prof.B) >= 0)
    assert np.allclose(prof.A[1:] ** 2, wall_metric(RW, y[1:]).g_xx, atol=1e-10)


def test_large_y_limits():
    y = np.array([200.0, 200.5])
    prof = embed_profile(RW, y)
    assert prof.A[0] == pytest.approx(math.sqrt(0.5), abs=0.03)
    assert (prof.B[1] - prof.B[0]) / 0.5 == pytest.approx(math.sqrt(0.5), abs=0.03)


def test_meridian_length_is_sqrt_gyy():
    # A'^2 + B'^2 = g_yy, so the meridian arc length measures the metric
    y = np.linspace(0.5, 3.0, 2001)
    prof = embed_profile(RW, y)
    arc = np.hypot(np.diff(prof.A), np.diff(prof.B))
    mid = 0.5 * (y[1:] + y[:-1])
    assert np.allclose(arc, np.sqrt(wall_metric(RW, mid).g_yy) * np.diff(y), rtol=1e-6)


def test_curvature_limits_and_peak():
    assert curvature_profile(RW, 1e-3) == pytest.approx(-0.5, abs=1e-4)
    y = np.linspace(0.5, 5.0, 451)
    assert 1.7 < y[np.argmax(curvature_profile(RW, y))] < 2.3


def test_curvature_consistent_with_density():
    y = np.array([0.2, 1.0, 2.0, 4.0])
    m = wall_metric(RW, y)
    assert np.allclose(4 * math.pi * charge_density(RW, y),
                       curvature_profile(RW, y) * np.sqrt(m.g_xx * m.g_yy), atol=1e-8)


def test_tessellate_counts():
    prof = RevolutionProfile(np.array([1.0, 2.0]), np.array([1.0, 1.5]), np.array([0.0, 1.0]),
                             np.array([True, True]))
    mesh = tessellate(prof, 4)
    assert mesh.triangles.shape == (8, 3)
    assert mesh.vertices.shape == (8, 3)


def test_apex_collapse_and_vertex_placement():
    prof = embed_profile(RW, np.linspace(0.0, 2.0, 9))
    mesh = tessellate(prof, 16)
    assert np.sum(mesh.params[:, 1] == 0.0) == 1
    assert mesh.triangles.shape[0] == 16 + 2 * 16 * 7
    x, y = mesh.params[:, 0], mesh.params[:, 1]
    idx = np.searchsorted(prof.y_samples, y)
    A, B = prof.A[idx], prof.B[idx]
    assert np.array_equal(mesh.vertices, np.stack([A * np.cos(x), A * np.sin(x), B], axis=1))


def test_meridians_every_quarter():
    prof = embed_profile(RW, np.linspace(0.0, 7.0, 113))
    mesh = tessellate(prof, 8, gridline_step=0.25)
    assert mesh.meridian_y.size == 29
    assert np.allclose(mesh.meridian_y, 0.25 * np.arange(29))


def test_edge_lengths_converge_to_metric():
    # chord along x: 2 A sin(dx/2) = A dx (1 - dx^2/24 + ...)
    errs = []
    for n in (32, 64):
        prof = embed_profile(RW, np.array([1.0, 1.1]))
        mesh = tessellate(prof, n)
        chord = np.linalg.norm(mesh.vertices[1] - mesh.vertices[0])
        exact = math.sqrt(wall_metric(RW, 1.0).g_xx) * 2 * math.pi / n
        errs.append(abs(chord / exact - 1))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.01)


def test_discrete_curvature_second_order():
    e1, _ = ring_curvature_error(64)
    e2, _ = ring_curvature_error(128)
    assert e1.max() / e2.max() == pytest.approx(4.0, rel=0.25)


def test_discrete_curvature_boundary_is_nan():
    prof = embed_profile(RW, np.linspace(0.5, 2.0, 7))
    K = discrete_gaussian_curvature(tessellate(prof, 12))
    assert np.all(np.isnan(K[:12])) and np.all(np.isnan(K[-12:]))
    assert np.all(np.isfinite(K[12:-12]))


def test_truncation_warns():
    valid = np.array([True, True, True, False, True])
    prof = RevolutionProfile(np.arange(1.0, 6.0), np.ones(5), np.arange(5.0), valid)
    with pytest.warns(RuntimeWarning, match="truncated"):
        mesh = tessellate(prof, 8)
    assert mesh.n_rings == 3


def test_membrane_anchor_and_errors():
    membrane = make_membrane()
    y = np.linspace(0.3, 3.0, 28)
    prof = embed_profile(membrane, y)
    first = int(np.argmax(prof.valid))
    assert first == 1  # |f| > 2 at y = 0.3
    assert prof.B[first] == 0.0 and np.isnan(prof.B[0])
    assert np.all(np.abs(integrated_charge(membrane, y[prof.valid])) < 2)
    with pytest.raises(EmbeddingError):
        embed_profile(membrane, np.linspace(0.06, 0.1, 5))
    with pytest.raises(GeometryError):
        embed_profile(membrane, np.array([0.0, 0.5]))


def test_tessellate_validation():
    prof = embed_profile(RW, np.linspace(0.0, 1.0, 5))
    with pytest.raises(GeometryError):
        tessellate(prof, 2)
    with pytest.raises(GeometryError):
        tessellate(prof, 8, gridline_step=0.0)
    with pytest.raises(GeometryError):
        embed_profile(RW, np.array([1.0, 0.5]))
