"""Cylindrical-array geometry: element layout, wavevectors, platform motion.

Coordinate conventions: right-handed x/y/z with z pointing up and the
cylinder axis along y. Azimuth is measured in the horizontal plane,
elevation is positive looking down toward the ground (so the wavevector
of a ground scatterer has a negative z component). All angles are in
radians; degrees are converted at the config-file boundary only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class AngleVector:
    """Azimuth/elevation direction pair, radians.

    Azimuth wraps into [0, 2*pi); elevation must lie in [-pi/2, pi/2].
    """

    azimuth: float
    elevation: float

    def __post_init__(self):
        if not math.isfinite(self.azimuth) or not math.isfinite(self.elevation):
            raise ValueError("angles must be finite")
        if not -math.pi / 2 <= self.elevation <= math.pi / 2:
            raise ValueError(f"elevation {self.elevation!r} outside [-pi/2, pi/2]")
        object.__setattr__(self, "azimuth", float(self.azimuth) % TWO_PI)
        object.__setattr__(self, "elevation", float(self.elevation))


@dataclass(frozen=True)
class ArrayGeometry:
    """Cylindrical array of `rings` rings, each with `elements_per_ring` elements."""

    rings: int               # M
    elements_per_ring: int   # N
    ring_spacing: float      # d, meters between adjacent rings along the cylinder axis
    ring_radius: float       # r, meters
    wavelength: float        # carrier wavelength, meters

    def __post_init__(self):
        if self.rings < 1 or self.elements_per_ring < 1:
            raise ValueError("need at least one ring and one element per ring")
        if self.ring_spacing <= 0 or self.ring_radius <= 0 or self.wavelength <= 0:
            raise ValueError("ring_spacing, ring_radius and wavelength must be positive")

    @property
    def n_channels(self) -> int:
        """Total number of spatial channels N*M."""
        return self.rings * self.elements_per_ring


@dataclass(frozen=True)
class PlatformState:
    """Platform motion and pulse timing."""

    speed: float       # |v_p|, m/s
    crab_angle: float  # sigma, radians between flight direction and cylinder axis
    height: float      # H, meters above ground
    pri: float         # pulse repetition interval T, seconds
    pulses: int        # P, pulses in the coherent processing interval

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError("speed must be nonnegative")
        if self.height <= 0 or self.pri <= 0:
            raise ValueError("height and pri must be positive")
        if self.pulses < 2:
            raise ValueError("need at least two pulses")


def wavevector(psi: AngleVector) -> np.ndarray:
    """Unit direction vector orthogonal to the incoming planar wavefront."""
    cos_el = math.cos(psi.elevation)
    return np.array([
        cos_el * math.cos(psi.azimuth),
        cos_el * math.sin(psi.azimuth),
        -math.sin(psi.elevation),
    ])


def wavevectors(azimuths: np.ndarray, elevation: float) -> np.ndarray:
    """Wavevectors for many azimuths at a common elevation, shape (K, 3)."""
    az = np.asarray(azimuths, dtype=float)
    cos_el = math.cos(elevation)
    return np.column_stack([
        cos_el * np.cos(az),
        cos_el * np.sin(az),
        np.full(az.shape, -math.sin(elevation)),
    ])


def element_position(geom: ArrayGeometry, m: int, n: int) -> np.ndarray:
    """Position of element n on ring m (both 1-based), meters.

    Element 1 sits at the bottom of each ring; rings advance along +y.
    """
    if not 1 <= m <= geom.rings:
        raise ValueError(f"ring index {m} outside 1..{geom.rings}")
    if not 1 <= n <= geom.elements_per_ring:
        raise ValueError(f"element index {n} outside 1..{geom.elements_per_ring}")
    beta = TWO_PI * (n - 1) / geom.elements_per_ring
    return np.array([
        geom.ring_radius * math.sin(beta),
        geom.ring_spacing * (m - 1),
        -geom.ring_radius * math.cos(beta),
    ])


def element_positions(geom: ArrayGeometry) -> np.ndarray:
    """All element positions, shape (N*M, 3).

    Channel ordering everywhere in this package: the element index n varies
    fastest within a ring, the ring index m slower, so channel c = (m-1)*N + (n-1).
    """
    beta = TWO_PI * np.arange(geom.elements_per_ring) / geom.elements_per_ring
    ring = np.column_stack([
        geom.ring_radius * np.sin(beta),
        np.zeros_like(beta),
        -geom.ring_radius * np.cos(beta),
    ])
    pos = np.tile(ring, (geom.rings, 1))
    pos[:, 1] = np.repeat(geom.ring_spacing * np.arange(geom.rings), geom.elements_per_ring)
    return pos


def platform_velocity(platform: PlatformState) -> np.ndarray:
    """Platform velocity vector (level flight, crabbed relative to the array axis)."""
    return np.array([
        -platform.speed * math.sin(platform.crab_angle),
        platform.speed * math.cos(platform.crab_angle),
        0.0,
    ])


def elevation_for_slant_range(height: float, slant_range: float) -> float:
    """Depression angle of the iso-range ring at the given slant range.

    Flat-earth model: theta = arcsin(H/R). The scenarios here are short-range
    (a few platform heights), where earth curvature is negligible.
    """
    if height <= 0:
        raise ValueError("height must be positive")
    if slant_range < height:
        raise ValueError("range above horizon geometry")
    return math.asin(height / slant_range)
