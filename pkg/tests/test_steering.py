import cmath
import math

import numpy as np
import pytest

from cfastap.geometry import AngleVector, ArrayGeometry, PlatformState
from cfastap.steering import (
    SteeringVector,
    doppler_frequency,
    space_time_product,
    space_time_steering,
    spatial_steering,
    spatial_steering_matrix,
    temporal_steering,
    temporal_steering_matrix,
)


def scalar_spatial_entry(geom, psi, m, n):
    """Independent per-entry evaluation of the spatial phase (test oracle)."""
    k = (math.cos(psi.elevation) * math.cos(psi.azimuth),
         math.cos(psi.elevation) * math.sin(psi.azimuth),
         -math.sin(psi.elevation))
    beta = 2 * math.pi * (n - 1) / geom.elements_per_ring
    s = (geom.ring_radius * math.sin(beta),
         geom.ring_spacing * (m - 1),
         -geom.ring_radius * math.cos(beta))
    dot = sum(ki * si for ki, si in zip(k, s))
    return cmath.exp(1j * 2 * math.pi / geom.wavelength * dot)


def test_spatial_steering_against_scalar_oracle(reference_geometry):
    geom = reference_geometry
    psi = AngleVector(math.pi / 4, 0.7297)
    sv = spatial_steering(geom, psi)
    assert sv.kind == "spatial"
    assert len(sv) == 16
    for m in range(1, 5):
        for n in range(1, 5):
            c = (m - 1) * 4 + (n - 1)
            expected = scalar_spatial_entry(geom, psi, m, n)
            assert sv.values[c] == pytest.approx(expected, abs=1e-12)


def test_spatial_steering_degenerate_array():
    tiny = ArrayGeometry(3, 4, 1e-12, 1e-12, 0.3)
    sv = spatial_steering(tiny, AngleVector(1.0, 0.5))
    np.testing.assert_allclose(sv.values, np.ones(12), atol=1e-9)


def test_spatial_steering_nadir_depends_only_on_n(reference_geometry):
    geom = reference_geometry
    sv = spatial_steering(geom, AngleVector(0.0, math.pi / 2)).values.reshape(4, 4)
    for m in range(1, 4):
        np.testing.assert_allclose(sv[m], sv[0], atol=1e-12)
    expected = np.exp(1j * 2 * math.pi / 0.3 * 0.15 * np.cos(2 * math.pi * np.arange(4) / 4))
    np.testing.assert_allclose(sv[0], expected, atol=1e-12)


def test_doppler_frequency_reference_values(reference_geometry, reference_platform):
    # along-track look at zero elevation: f_d = 2*v*T/lambda = 0.5
    psi = AngleVector(math.pi / 2, 0.0)
    fd = doppler_frequency(psi, reference_platform, reference_geometry.wavelength)
    assert fd == pytest.approx(0.5, abs=1e-12)
    # orthogonal look: zero Doppler
    assert doppler_frequency(AngleVector(0.0, 0.0), reference_platform, 0.3) == pytest.approx(0.0, abs=1e-12)
    # scalar oracle: 2*cos(el)*sin(az - crab)*v*T/lambda
    crabbed = PlatformState(300.0, 0.3, 3000.0, 0.25e-3, 16)
    psi = AngleVector(1.1, 0.4)
    expected = 2 * 300.0 * 0.25e-3 / 0.3 * math.cos(0.4) * math.sin(1.1 - 0.3)
    assert doppler_frequency(psi, crabbed, 0.3) == pytest.approx(expected, abs=1e-12)


def test_temporal_steering():
    sv = temporal_steering(0.0, 8)
    np.testing.assert_allclose(sv.values, np.ones(8), atol=1e-15)
    sv = temporal_steering(0.5, 4)
    np.testing.assert_allclose(sv.values, [1, -1, 1, -1], atol=1e-12)
    sv = temporal_steering(0.25, 16)
    np.testing.assert_allclose(sv.values, np.exp(1j * math.pi / 2 * np.arange(16)), atol=1e-12)
    assert sv.values[0] == 1.0


def test_space_time_steering_shape_and_kron(reference_geometry, reference_platform):
    psi = AngleVector(0.8, 0.5)
    sv = space_time_steering(reference_geometry, psi, reference_platform)
    assert sv.kind == "space_time"
    assert len(sv) == 256
    assert np.linalg.norm(sv.values) ** 2 == pytest.approx(256.0, rel=1e-12)

    # index oracle: entry(p, m, n) = temporal(p) * spatial(m, n)
    fd = doppler_frequency(psi, reference_platform, reference_geometry.wavelength)
    temporal = temporal_steering(fd, 16).values
    spatial = spatial_steering(reference_geometry, psi).values
    rng = np.random.default_rng(3)
    for _ in range(20):
        p = rng.integers(0, 16)
        c = rng.integers(0, 16)
        assert sv.values[p * 16 + c] == pytest.approx(temporal[p] * spatial[c], abs=1e-12)


def test_space_time_kron_reshape_recovers_outer_product(reference_geometry, reference_platform):
    psi = AngleVector(2.3, 0.6)
    sv = space_time_steering(reference_geometry, psi, reference_platform)
    fd = doppler_frequency(psi, reference_platform, reference_geometry.wavelength)
    grid = sv.values.reshape(16, 16)
    outer = np.outer(temporal_steering(fd, 16).values, spatial_steering(reference_geometry, psi).values)
    np.testing.assert_allclose(grid, outer, atol=1e-12)


def test_moving_target_override_changes_only_temporal(reference_geometry, reference_platform):
    psi = AngleVector(1.0, 0.3)
    stationary = space_time_steering(reference_geometry, psi, reference_platform)
    moving = space_time_steering(reference_geometry, psi, reference_platform, doppler=0.31)
    s_grid = stationary.values.reshape(16, 16)
    m_grid = moving.values.reshape(16, 16)
    # spatial part unchanged: first pulse row identical
    np.testing.assert_allclose(m_grid[0], s_grid[0], atol=1e-12)
    np.testing.assert_allclose(m_grid[1] / m_grid[0], np.full(16, np.exp(1j * 2 * np.pi * 0.31)), atol=1e-12)


def test_space_time_product_matches_kron():
    rng = np.random.default_rng(5)
    temporal = np.exp(1j * rng.uniform(0, 2 * np.pi, (4, 3)))
    spatial = np.exp(1j * rng.uniform(0, 2 * np.pi, (5, 3)))
    combined = space_time_product(temporal, spatial)
    for q in range(3):
        np.testing.assert_allclose(combined[:, q], np.kron(temporal[:, q], spatial[:, q]), atol=1e-15)


def test_steering_vector_validation():
    with pytest.raises(ValueError):
        SteeringVector(np.array([1.0, 2.0]), "temporal")
    with pytest.raises(ValueError):
        SteeringVector(np.ones(4), "bogus")


def test_steering_matrices_match_single_vectors(reference_geometry):
    az = np.array([0.1, 1.7, 4.0])
    mat = spatial_steering_matrix(reference_geometry, az, 0.5)
    for i, a in enumerate(az):
        np.testing.assert_allclose(mat[:, i],
                                   spatial_steering(reference_geometry, AngleVector(a, 0.5)).values,
                                   atol=1e-12)
    tm = temporal_steering_matrix(np.array([0.1, -0.3]), 6)
    np.testing.assert_allclose(tm[:, 0], temporal_steering(0.1, 6).values, atol=1e-12)
    np.testing.assert_allclose(tm[:, 1], temporal_steering(-0.3, 6).values, atol=1e-12)
