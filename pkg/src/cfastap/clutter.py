"""Ground-truth clutter synthesis and the clairvoyant clutter covariance.

One iso-range ring of scatterers per range cell (no range ambiguity). Each
scatterer contributes a space-time steering atom with a complex-normal
reflectivity; amplitudes are calibrated so the per-sample clutter-to-noise
ratio of the assembled covariance hits the configured CNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    AngleVector,
    ArrayGeometry,
    PlatformState,
    element_positions,
    elevation_for_slant_range,
    platform_velocity,
    wavevectors,
)
from .steering import (
    space_time_product,
    spatial_steering_matrix,
    temporal_steering_matrix,
)

SPEED_OF_LIGHT = 299792458.0

GAIN_MODELS = ("isotropic", "cosine-element")


@dataclass(frozen=True)
class SpaceTimeTaper:
    """Covariance matrix tapers for channel mismatch / intrinsic clutter motion.

    None means the identity taper (taper vector of ones, all-ones Hadamard
    factor on the covariance). Non-identity tapers are applied to the
    clairvoyant covariance only; snapshot synthesis supports the identity
    case.
    """

    spatial: np.ndarray | None = None   # A_s, (N*M, N*M) Hermitian PSD
    temporal: np.ndarray | None = None  # A_t, (P, P) Hermitian PSD

    @property
    def is_identity(self) -> bool:
        return self.spatial is None and self.temporal is None

    def hadamard_factor(self, channels: int, pulses: int) -> np.ndarray | None:
        """Full space-time taper A_t (x) A_s, or None for the identity case."""
        if self.is_identity:
            return None
        a_s = np.ones((channels, channels)) if self.spatial is None else np.asarray(self.spatial)
        a_t = np.ones((pulses, pulses)) if self.temporal is None else np.asarray(self.temporal)
        if a_s.shape != (channels, channels) or a_t.shape != (pulses, pulses):
            raise ValueError("taper matrix shapes do not match the array dimensions")
        return np.kron(a_t, a_s)


@dataclass(frozen=True)
class Snapshot:
    """Stacked space-time data vector of one range cell, length N*M*P."""

    data: np.ndarray
    range_index: int

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.ndim != 1:
            raise ValueError("snapshot data must be one-dimensional")
        if not np.all(np.isfinite(data.real)) or not np.all(np.isfinite(data.imag)):
            raise ValueError("snapshot data must be finite")
        object.__setattr__(self, "data", data)


@dataclass(frozen=True)
class Covariance:
    """Complex space-time covariance matrix with a free-text label."""

    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("covariance must be a square matrix")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def validate(self, rtol: float = 1e-10) -> None:
        """Check Hermitian symmetry and positive semidefiniteness up to roundoff."""
        scale = float(np.abs(self.matrix).max()) or 1.0
        if not np.allclose(self.matrix, self.matrix.conj().T, rtol=0.0, atol=rtol * scale):
            raise ValueError("covariance is not Hermitian")
        eigvals = np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))
        trace = float(np.real(np.trace(self.matrix)))
        if eigvals.min() < -1e-10 * max(trace, 1.0):
            raise ValueError("covariance is not positive semidefinite")


@dataclass(frozen=True)
class ClutterScenario:
    """Everything that determines the simulated clutter environment."""

    geometry: ArrayGeometry
    platform: PlatformState
    n_scatterers: int                 # scatterers per iso-range ring
    cnr_db: float                     # per-sample clutter power over noise power
    range_cells: tuple[float, ...]    # slant ranges, meters, strictly increasing
    test_cell_index: int
    noise_power: float = 1.0          # sigma_n^2, linear, per sample
    gain_model: str = "isotropic"
    taper: SpaceTimeTaper = field(default_factory=SpaceTimeTaper)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "range_cells",
                           tuple(float(r) for r in self.range_cells))
        dof = self.geometry.n_channels * self.platform.pulses
        if self.n_scatterers * 4 < dof:
            raise ValueError(
                f"need at least NMP/4 = {dof // 4} scatterers per ring to sample the ridge")
        if not math.isfinite(self.cnr_db):
            raise ValueError("cnr_db must be finite")
        if self.noise_power <= 0:
            raise ValueError("noise_power must be positive")
        if self.gain_model not in GAIN_MODELS:
            raise ValueError(f"unknown gain model {self.gain_model!r}")
        if len(self.range_cells) == 0:
            raise ValueError("need at least one range cell")
        if any(r2 <= r1 for r1, r2 in zip(self.range_cells, self.range_cells[1:])):
            raise ValueError("range cells must be strictly increasing")
        if self.range_cells[0] < self.platform.height:
            raise ValueError("all range cells must be at or beyond the platform height")
        if not 0 <= self.test_cell_index < len(self.range_cells):
            raise ValueError("test_cell_index out of range")

    @property
    def dof(self) -> int:
        """Space-time dimension N*M*P."""
        return self.geometry.n_channels * self.platform.pulses

    def elevation(self, k: int) -> float:
        """Iso-range depression angle of range cell k."""
        return elevation_for_slant_range(self.platform.height, self.range_cells[k])


def channel_gains(geom: ArrayGeometry, azimuths: np.ndarray, elevation: float,
                  gain_model: str) -> np.ndarray:
    """Per-channel amplitude gains sqrt(g) for each arrival azimuth, shape (N*M, K).

    'isotropic' is all ones. 'cosine-element' projects the arrival direction
    onto each element's outward radial normal (power gain clipped at zero on
    the shadowed side, amplitude is its square root).
    """
    az = np.asarray(azimuths, dtype=float)
    if gain_model == "isotropic":
        return np.ones((geom.n_channels, az.size))
    if gain_model != "cosine-element":
        raise ValueError(f"unknown gain model {gain_model!r}")
    positions = element_positions(geom)
    normals = positions.copy()
    normals[:, 1] = 0.0
    normals /= geom.ring_radius
    power = np.clip(normals @ wavevectors(az, elevation).T, 0.0, None)
    return np.sqrt(power)


def iso_range_scatterers(sc: ClutterScenario, k: int) -> list[tuple[AngleVector, float]]:
    """Scatterers of range cell k: uniform azimuths on the iso-range ring.

    Amplitudes are uniform across azimuth and scaled so that the assembled
    clairvoyant covariance meets the scenario CNR (see cnr_scale).
    """
    theta = sc.elevation(k)
    azimuths = 2.0 * np.pi * np.arange(sc.n_scatterers) / sc.n_scatterers
    gains = channel_gains(sc.geometry, azimuths, theta, sc.gain_model)
    # per-atom squared norm is P * sum_ch g^2; CNR fixes the total clutter trace
    trace_unnormalized = sc.platform.pulses * float(np.sum(gains ** 2))
    if trace_unnormalized == 0.0:
        raise ValueError("all scatterer gains vanish; cannot calibrate CNR")
    target = 10.0 ** (sc.cnr_db / 10.0) * sc.dof * sc.noise_power
    amplitude = math.sqrt(target / trace_unnormalized)
    return [(AngleVector(az, theta), amplitude) for az in azimuths]


def cnr_scale(unnormalized: Covariance | np.ndarray, noise_power: float,
              cnr_db: float) -> float:
    """Power scale c for a clutter covariance so per-sample CNR hits cnr_db.

    trace(c * R_clutter) / (dim * noise_power) = 10^(cnr_db/10).
    """
    matrix = unnormalized.matrix if isinstance(unnormalized, Covariance) else np.asarray(unnormalized)
    trace = float(np.real(np.trace(matrix)))
    if trace <= 0.0:
        raise ValueError("clutter covariance has nonpositive trace; cannot scale")
    return 10.0 ** (cnr_db / 10.0) * matrix.shape[0] * noise_power / trace


def scatterer_atoms(sc: ClutterScenario, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Space-time atoms of all scatterers in cell k.

    Returns (atoms, amplitudes): atoms has shape (N*M*P, N_c) with gains
    applied, amplitudes is the per-scatterer voltage scale.
    """
    scatterers = iso_range_scatterers(sc, k)
    azimuths = np.array([psi.azimuth for psi, _ in scatterers])
    amplitudes = np.array([v for _, v in scatterers])
    theta = sc.elevation(k)

    spatial = spatial_steering_matrix(sc.geometry, azimuths, theta)
    spatial *= channel_gains(sc.geometry, azimuths, theta, sc.gain_model)
    dopplers = 2.0 * (wavevectors(azimuths, theta) @ platform_velocity(sc.platform)) \
        * sc.platform.pri / sc.geometry.wavelength
    temporal = temporal_steering_matrix(dopplers, sc.platform.pulses)
    return space_time_product(temporal, spatial), amplitudes


def ccm_from_scatterers(atoms: np.ndarray, powers: np.ndarray, noise_power: float,
                        taper: SpaceTimeTaper | None = None, pulses: int | None = None,
                        label: str = "") -> Covariance:
    """Assemble sum_q power_q * a_q a_q^H + noise_power * I from precomputed atoms."""
    scaled = atoms * np.sqrt(np.asarray(powers, dtype=float))
    matrix = scaled @ scaled.conj().T
    if taper is not None and not taper.is_identity:
        if pulses is None:
            raise ValueError("pulses required to expand a non-identity taper")
        matrix *= taper.hadamard_factor(atoms.shape[0] // pulses, pulses)
    matrix = 0.5 * (matrix + matrix.conj().T)
    matrix[np.diag_indices_from(matrix)] += noise_power
    return Covariance(matrix, label)


def clairvoyant_ccm(sc: ClutterScenario, k: int) -> Covariance:
    """Exact clutter-plus-noise covariance of range cell k."""
    atoms, amplitudes = scatterer_atoms(sc, k)
    return ccm_from_scatterers(atoms, amplitudes ** 2, sc.noise_power,
                               taper=sc.taper, pulses=sc.platform.pulses,
                               label=f"clairvoyant[{k}]")


def _cell_rng(sc: ClutterScenario, k: int, draw: int) -> np.random.Generator:
    # counter-based seeding: reproducible and independent across cells/draws
    return np.random.default_rng((sc.seed, k, draw))


def clutter_snapshot(sc: ClutterScenario, k: int, draw: int = 0) -> Snapshot:
    """One realization of the clutter-plus-noise snapshot at range cell k.

    Reflectivities are i.i.d. standard complex normal, the noise is white
    complex normal with per-sample power noise_power. The random stream is
    derived from (scenario seed, k, draw), so repeat calls are bit-identical
    and distinct cells/draws are independent.
    """
    if not sc.taper.is_identity:
        raise NotImplementedError("snapshot synthesis supports the identity taper only")
    atoms, amplitudes = scatterer_atoms(sc, k)
    rng = _cell_rng(sc, k, draw)
    data = _draw_snapshot(atoms, amplitudes, sc.noise_power, rng)
    return Snapshot(data, k)


def clutter_snapshots(sc: ClutterScenario, k: int, draws: int) -> np.ndarray:
    """Batch of independent snapshots of cell k, shape (draws, N*M*P).

    Row i is bit-identical to clutter_snapshot(sc, k, draw=i); the atoms are
    built once, which is what makes Monte-Carlo runs cheap.
    """
    if not sc.taper.is_identity:
        raise NotImplementedError("snapshot synthesis supports the identity taper only")
    atoms, amplitudes = scatterer_atoms(sc, k)
    out = np.empty((draws, atoms.shape[0]), dtype=complex)
    for i in range(draws):
        out[i] = _draw_snapshot(atoms, amplitudes, sc.noise_power, _cell_rng(sc, k, i))
    return out


def _complex_normal(rng: np.random.Generator, size: int) -> np.ndarray:
    # unit-variance circular complex normal
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2.0)


def _draw_snapshot(atoms: np.ndarray, amplitudes: np.ndarray, noise_power: float,
                   rng: np.random.Generator) -> np.ndarray:
    zeta = _complex_normal(rng, atoms.shape[1])
    noise = math.sqrt(noise_power) * _complex_normal(rng, atoms.shape[0])
    return atoms @ (amplitudes * zeta) + noise


def training_cell_indices(n_cells: int, test_index: int, n_training: int) -> list[int]:
    """Training cells adjacent to the test cell, split evenly on both sides.

    The test cell itself is excluded. Raises if the window does not fit.
    """
    if n_training < 0:
        raise ValueError("n_training must be nonnegative")
    below = n_training // 2
    above = n_training - below
    if test_index - below < 0 or test_index + above >= n_cells:
        raise ValueError(
            f"{n_training} training cells around index {test_index} do not fit in {n_cells} cells")
    return [test_index + off for off in range(-below, above + 1) if off != 0]


def default_scenario(crab_angle: float = 0.0,
                     n_training: int = 40,
                     rings: int = 4,
                     elements_per_ring: int = 4,
                     pulses: int = 16,
                     speed: float = 300.0,
                     pri: float = 0.25e-3,
                     sample_rate: float = 5.0e6,
                     wavelength: float = 0.3,
                     ring_spacing: float = 0.15,
                     ring_radius: float = 0.15,
                     height: float = 3000.0,
                     cnr_db: float = 30.0,
                     test_range_factor: float = 1.5,
                     n_scatterers: int = 360,
                     noise_power: float = 1.0,
                     gain_model: str = "isotropic",
                     seed: int = 0) -> ClutterScenario:
    """Reference short-range scenario used across tests, demos and the CLI.

    Range cells are spaced by c/(2*f_s) around the test cell at
    test_range_factor * height, with n_training cells split evenly around it.
    """
    geom = ArrayGeometry(rings, elements_per_ring, ring_spacing, ring_radius, wavelength)
    platform = PlatformState(speed, crab_angle, height, pri, pulses)
    spacing = SPEED_OF_LIGHT / (2.0 * sample_rate)
    below = n_training // 2
    above = n_training - below
    center = test_range_factor * height
    ranges = center + spacing * np.arange(-below, above + 1)
    return ClutterScenario(
        geometry=geom,
        platform=platform,
        n_scatterers=n_scatterers,
        cnr_db=cnr_db,
        range_cells=tuple(ranges),
        test_cell_index=below,
        noise_power=noise_power,
        gain_model=gain_model,
        seed=seed,
    )
