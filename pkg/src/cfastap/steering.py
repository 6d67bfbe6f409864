"""Spatial, temporal and space-time steering vectors.

Doppler is normalized throughout: f_d is in cycles per PRI, so the visible
band is [-1/2, 1/2) and f_hz = f_d / pri.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    AngleVector,
    ArrayGeometry,
    PlatformState,
    element_positions,
    platform_velocity,
    wavevector,
    wavevectors,
)

KINDS = ("spatial", "temporal", "space_time")


@dataclass(frozen=True)
class SteeringVector:
    """Unit-modulus steering vector with its kind tag.

    kind is one of 'spatial' (length N*M), 'temporal' (length P) or
    'space_time' (length N*M*P).
    """

    values: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown steering kind {self.kind!r}")
        values = np.asarray(self.values, dtype=complex)
        if values.ndim != 1:
            raise ValueError("steering vector must be one-dimensional")
        if not np.allclose(np.abs(values), 1.0, rtol=0.0, atol=1e-12):
            raise ValueError("steering vector entries must have unit modulus")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.shape[0]


def spatial_steering(geom: ArrayGeometry, psi: AngleVector) -> SteeringVector:
    """Spatial steering vector across all N*M channels (element index fastest)."""
    values = spatial_steering_matrix(geom, np.array([psi.azimuth]), psi.elevation)[:, 0]
    return SteeringVector(values, "spatial")


def spatial_steering_matrix(geom: ArrayGeometry, azimuths: np.ndarray,
                            elevation: float) -> np.ndarray:
    """Spatial steering vectors for many azimuths at one elevation, shape (N*M, K)."""
    k_dirs = wavevectors(azimuths, elevation)           # (K, 3)
    phase = (2.0 * np.pi / geom.wavelength) * (element_positions(geom) @ k_dirs.T)
    return np.exp(1j * phase)


def doppler_frequency(psi: AngleVector, platform: PlatformState,
                      wavelength: float) -> float:
    """Normalized Doppler (cycles/PRI) of a stationary scatterer seen from the platform."""
    return 2.0 * float(wavevector(psi) @ platform_velocity(platform)) \
        * platform.pri / wavelength


def temporal_steering(doppler: float, pulses: int) -> SteeringVector:
    """Temporal steering vector exp(j*2*pi*f_d*p), p = 0..P-1; first entry is 1."""
    if pulses < 2:
        raise ValueError("need at least two pulses")
    return SteeringVector(temporal_steering_matrix(np.array([doppler]), pulses)[:, 0],
                          "temporal")


def temporal_steering_matrix(dopplers: np.ndarray, pulses: int) -> np.ndarray:
    """Temporal steering vectors for many normalized Dopplers, shape (P, K)."""
    dopplers = np.asarray(dopplers, dtype=float)
    phase = 2.0 * np.pi * np.outer(np.arange(pulses), dopplers)
    return np.exp(1j * phase)


def space_time_steering(geom: ArrayGeometry, psi: AngleVector,
                        platform: PlatformState,
                        doppler: float | None = None) -> SteeringVector:
    """Space-time steering vector, temporal (x) spatial Kronecker product.

    The length is N*M*P with the pulse index varying slowest. `doppler`
    overrides the stationary-scatterer Doppler implied by the geometry;
    use it to steer at a moving target (same angles, free Doppler).
    """
    if doppler is None:
        doppler = doppler_frequency(psi, platform, geom.wavelength)
    temporal = temporal_steering(doppler, platform.pulses)
    spatial = spatial_steering(geom, psi)
    return SteeringVector(np.kron(temporal.values, spatial.values), "space_time")


def space_time_product(temporal: np.ndarray, spatial: np.ndarray) -> np.ndarray:
    """Columnwise Kronecker of paired temporal (P, K) and spatial (NM, K) factors.

    Returns (P*NM, K) with the pulse index slowest, matching space_time_steering.
    """
    pulses, k = temporal.shape
    channels = spatial.shape[0]
    if spatial.shape[1] != k:
        raise ValueError("temporal and spatial factor counts differ")
    return (temporal[:, None, :] * spatial[None, :, :]).reshape(pulses * channels, k)
