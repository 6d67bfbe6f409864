"""Adaptive filter construction and normalized improvement-factor loss.

The loss of a filter w against a target steering vector s under the true
covariance R is

    10 log10( |w^H s|^2 / (w^H R w * s^H R^{-1} s) )

which is 0 dB exactly when w is proportional to R^{-1} s and negative
otherwise (Cauchy-Schwarz in the R inner product). The filter scale is
irrelevant, so weights are computed by a linear solve without normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .clutter import ClutterScenario, Covariance, Snapshot
from .dictionary import Dictionary, GridSpec
from .geometry import AngleVector
from .sparse import SpectrumEstimate, fourier_init
from .steering import SteeringVector, doppler_frequency, space_time_steering

SPECTRUM_FLOOR_DB = -120.0


@dataclass(frozen=True)
class IfLossCurve:
    """Loss versus target Doppler for one covariance-estimation method."""

    target_dopplers: np.ndarray
    loss_db: np.ndarray
    method: str = ""
    scenario_id: str = ""

    def __post_init__(self):
        if len(self.target_dopplers) != len(self.loss_db):
            raise ValueError("doppler and loss arrays must align")


def _matrix(cov: Covariance | np.ndarray) -> np.ndarray:
    matrix = cov.matrix if isinstance(cov, Covariance) else np.asarray(cov)
    return 0.5 * (matrix + matrix.conj().T)


def _vector(s: SteeringVector | np.ndarray) -> np.ndarray:
    return s.values if isinstance(s, SteeringVector) else np.asarray(s)


def _cho(matrix: np.ndarray, context: str):
    try:
        return scipy.linalg.cho_factor(matrix, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"{context}: apply loading") from exc


def adaptive_weight(r_hat: Covariance | np.ndarray,
                    s: SteeringVector | np.ndarray) -> np.ndarray:
    """Adaptive filter weights solving R_hat w = s (scale-free)."""
    factor = _cho(_matrix(r_hat), "covariance estimate is singular")
    return scipy.linalg.cho_solve(factor, _vector(s), check_finite=False)


def if_loss(w: np.ndarray, s: SteeringVector | np.ndarray,
            r_true: Covariance | np.ndarray) -> float:
    """Normalized improvement-factor loss in dB; always <= 0 up to roundoff."""
    matrix = _matrix(r_true)
    sv = _vector(s)
    w = np.asarray(w)
    w_r_w = float(np.real(w.conj() @ (matrix @ w)))
    if w_r_w <= 0.0:
        raise ValueError("filter output power is zero under the true covariance")
    factor = _cho(matrix, "true covariance is singular")
    s_rinv_s = float(np.real(sv.conj() @ scipy.linalg.cho_solve(factor, sv,
                                                                check_finite=False)))
    ratio = abs(w.conj() @ sv) ** 2 / (w_r_w * s_rinv_s)
    return 10.0 * math.log10(ratio)


def doppler_sweep(n_points: int = 101) -> np.ndarray:
    """Uniform target-Doppler grid over [-1/2, 1/2)."""
    return np.linspace(-0.5, 0.5, n_points, endpoint=False)


def broadside_target(sc: ClutterScenario) -> AngleVector:
    """Default evaluation target: cylinder broadside at the test-cell elevation."""
    return AngleVector(math.pi / 2.0, sc.elevation(sc.test_cell_index))


def if_loss_curve(sc: ClutterScenario, r_hat: Covariance,
                  target: AngleVector | None = None,
                  dopplers: np.ndarray | None = None,
                  method: str = "", scenario_id: str = "",
                  true_cov: Covariance | None = None) -> IfLossCurve:
    """Sweep the target Doppler at a fixed angle and record the loss per bin.

    The reference is the clairvoyant covariance of the test cell (computed
    here unless supplied).
    """
    from .clutter import clairvoyant_ccm

    if target is None:
        target = broadside_target(sc)
    if dopplers is None:
        dopplers = doppler_sweep()
    if true_cov is None:
        true_cov = clairvoyant_ccm(sc, sc.test_cell_index)

    true_matrix = _matrix(true_cov)
    true_factor = _cho(true_matrix, "true covariance is singular")
    hat_factor = _cho(_matrix(r_hat), "covariance estimate is singular")

    losses = np.empty(len(dopplers))
    for i, fd in enumerate(dopplers):
        sv = space_time_steering(sc.geometry, target, sc.platform, doppler=float(fd)).values
        w = scipy.linalg.cho_solve(hat_factor, sv, check_finite=False)
        w_r_w = float(np.real(w.conj() @ (true_matrix @ w)))
        s_rinv_s = float(np.real(sv.conj() @ scipy.linalg.cho_solve(true_factor, sv,
                                                                    check_finite=False)))
        losses[i] = 10.0 * math.log10(abs(w.conj() @ sv) ** 2 / (w_r_w * s_rinv_s))
    return IfLossCurve(np.asarray(dopplers, dtype=float), losses, method, scenario_id)


def clutter_notch_doppler(sc: ClutterScenario, target: AngleVector | None = None) -> float:
    """Doppler of the stationary clutter at the target azimuth on the test iso-range."""
    if target is None:
        target = broadside_target(sc)
    notch_angle = AngleVector(target.azimuth, sc.elevation(sc.test_cell_index))
    return doppler_frequency(notch_angle, sc.platform, sc.geometry.wavelength)


def circular_doppler_distance(f1, f2):
    """Distance between normalized Dopplers on the unit circle (period 1)."""
    delta = np.abs(np.asarray(f1) - np.asarray(f2)) % 1.0
    return np.minimum(delta, 1.0 - delta)


def mean_off_notch_loss(curve: IfLossCurve, notch_doppler: float,
                        exclusion: float = 0.1) -> float:
    """Mean loss over bins at least `exclusion` PRF away from the clutter notch."""
    mask = circular_doppler_distance(curve.target_dopplers, notch_doppler) >= exclusion
    if not np.any(mask):
        raise ValueError("exclusion band swallows the whole Doppler axis")
    return float(np.mean(curve.loss_db[mask]))


def _power_to_db_image(power: np.ndarray, grid: GridSpec,
                       floor_db: float) -> np.ndarray:
    image = power.reshape(grid.n_doppler, grid.n_azimuth)
    peak = image.max()
    if peak <= 0.0:
        return np.full(image.shape, floor_db)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(image / peak)
    return np.maximum(db, floor_db)


def fourier_spectrum_image(basis: Dictionary, x: Snapshot | np.ndarray,
                           floor_db: float = SPECTRUM_FLOOR_DB) -> np.ndarray:
    """Matched-filter power spectrum |Phi^H x|^2 on the grid, dB, 0 dB peak.

    Shape (n_doppler, n_azimuth); rows are Doppler bins. Zero input maps to
    the floor value everywhere.
    """
    power = np.abs(fourier_init(basis, x)) ** 2
    return _power_to_db_image(power, basis.grid, floor_db)


def sparse_spectrum_image(est: SpectrumEstimate, grid: GridSpec,
                          floor_db: float = SPECTRUM_FLOOR_DB) -> np.ndarray:
    """Recovered power spectrum |alpha|^2 on the grid, dB, 0 dB peak."""
    return _power_to_db_image(np.abs(est.amplitudes) ** 2, grid, floor_db)


def clutter_ridge_mask(sc: ClutterScenario, k: int, grid: GridSpec,
                       halfwidth: int = 1) -> np.ndarray:
    """Boolean (n_doppler, n_azimuth) mask within `halfwidth` Doppler cells of the ridge.

    The ridge is the locus (azimuth_i, doppler(azimuth_i)) of stationary
    scatterers on the cell's iso-range; Doppler distance wraps circularly.
    """
    theta = sc.elevation(k)
    mask = np.zeros((grid.n_doppler, grid.n_azimuth), dtype=bool)
    for i, az in enumerate(grid.azimuths):
        fd = doppler_frequency(AngleVector(az, theta), sc.platform, sc.geometry.wavelength)
        j = (int(round(fd * grid.n_doppler)) + grid.n_doppler // 2) % grid.n_doppler
        for off in range(-halfwidth, halfwidth + 1):
            mask[(j + off) % grid.n_doppler, i] = True
    return mask


def band_energy_fraction(power: np.ndarray, mask: np.ndarray) -> float:
    """Fraction of total power inside the mask; power shape (n_doppler, n_azimuth)."""
    total = float(power.sum())
    if total <= 0.0:
        raise ValueError("power image is empty")
    return float(power[mask].sum()) / total
