"""Angle-Doppler grid and the per-range-cell overcomplete space-time dictionary.

Atoms are pure space-time steering vectors on a dense angle-Doppler grid at
the elevation of the range cell's iso-range. The grid spans the whole plane;
it is the sparsity constraint downstream, not the construction here, that
concentrates solutions on the physical clutter ridge.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .clutter import ClutterScenario
from .geometry import ArrayGeometry
from .steering import spatial_steering_matrix, temporal_steering_matrix


@dataclass(frozen=True)
class GridSpec:
    """Discretization of the angle-Doppler plane.

    Azimuths are 2*pi*i/n_azimuth for i = 1..n_azimuth; Dopplers are uniform
    with spacing 1/n_doppler, recentered to [-1/2, 1/2).
    """

    zoom_spatial: float
    zoom_temporal: float
    n_azimuth: int
    n_doppler: int
    azimuths: np.ndarray
    dopplers: np.ndarray

    @property
    def n_atoms(self) -> int:
        return self.n_azimuth * self.n_doppler

    def node_index(self, azimuth_index: int, doppler_index: int) -> int:
        """Flat column index of grid node (i, j); azimuth varies fastest."""
        return doppler_index * self.n_azimuth + azimuth_index

    def node_of(self, column: int) -> tuple[int, int]:
        """(azimuth_index, doppler_index) of a flat column index."""
        return column % self.n_azimuth, column // self.n_azimuth


def build_grid(geom: ArrayGeometry, pulses: int, zoom_spatial: float = 4.0,
               zoom_temporal: float = 4.0) -> GridSpec:
    """Angle-Doppler grid with n_azimuth = round(zoom_s*N*M), n_doppler = round(zoom_t*P)."""
    if zoom_spatial < 1.0 or zoom_temporal < 1.0:
        raise ValueError("dictionary not overcomplete: zoom factors must be >= 1")
    n_azimuth = int(round(zoom_spatial * geom.n_channels))
    n_doppler = int(round(zoom_temporal * pulses))
    if n_azimuth * n_doppler <= geom.n_channels * pulses:
        warnings.warn("grid is not overcomplete (square basis); "
                      "sparse recovery degenerates to a plain solve", stacklevel=2)
    azimuths = 2.0 * np.pi * np.arange(1, n_azimuth + 1) / n_azimuth
    dopplers = (np.arange(n_doppler) - n_doppler // 2) / n_doppler
    return GridSpec(zoom_spatial, zoom_temporal, n_azimuth, n_doppler, azimuths, dopplers)


@dataclass(frozen=True)
class Dictionary:
    """Overcomplete basis of one range cell: (N*M*P, n_azimuth*n_doppler) atoms.

    Column ordering: azimuth index fastest, Doppler index slowest, so column
    j*n_azimuth + i holds the atom at (azimuths[i], dopplers[j]).
    """

    atoms: np.ndarray
    grid: GridSpec
    range_index: int
    elevation: float

    @property
    def n_atoms(self) -> int:
        return self.atoms.shape[1]

    @property
    def dof(self) -> int:
        return self.atoms.shape[0]


def build_dictionary(sc: ClutterScenario, k: int, grid: GridSpec) -> Dictionary:
    """Dictionary of range cell k: steering atoms at the cell's iso-range elevation."""
    theta = sc.elevation(k)
    spatial = spatial_steering_matrix(sc.geometry, grid.azimuths, theta)   # (NM, Ns)
    temporal = temporal_steering_matrix(grid.dopplers, sc.platform.pulses)  # (P, Nd)
    pulses, n_d = temporal.shape
    channels, n_s = spatial.shape
    atoms = (temporal[:, None, :, None] * spatial[None, :, None, :]) \
        .reshape(pulses * channels, n_d * n_s)
    return Dictionary(atoms, grid, k, theta)


def mutual_coherence(d: Dictionary, block: int = 512) -> float:
    """Largest normalized cross-correlation max |a_i^H a_j| / (N*M*P) over i != j.

    Computed blockwise to keep memory bounded; strictly below 1 for any grid
    with distinct atoms. Reported as a diagnostic of grid conditioning.
    """
    atoms = d.atoms
    dof = atoms.shape[0]
    worst = 0.0
    for start in range(0, atoms.shape[1], block):
        stop = min(start + block, atoms.shape[1])
        gram = np.abs(atoms[:, start:stop].conj().T @ atoms)
        cols = np.arange(start, stop)
        gram[np.arange(stop - start), cols] = 0.0
        worst = max(worst, float(gram.max()))
    return worst / dof
