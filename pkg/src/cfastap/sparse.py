"""Iterative reweighted least-squares recovery of sparse angle-Doppler spectra.

The solver alternates a weighted minimum-norm least-squares update with
support pruning and reweighting, starting from the dense matched-filter
spectrum. With unit weights the update is plain regularized least squares;
reweighting by the previous amplitudes is what drives most coefficients to
zero and leaves a sparse spectrum concentrated on the clutter ridge.

Update (on the retained support, W = diag(|alpha_previous|)):

    alpha = W A^H (A A^H + ridge I)^{-1} x,    A = Phi_support W

which is the minimum-norm weighted solution. The textbook pseudoinverse
(A^H A)^{-1} A^H is singular while the support is wider than the data
dimension, so the minimum-norm orientation with a ridge is used instead; for
a tall full-rank A and ridge -> 0 both coincide.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .clutter import Covariance, Snapshot
from .dictionary import Dictionary


@dataclass(frozen=True)
class IrlsConfig:
    """Knobs of the iterative solver.

    ridge regularizes the weighted pseudoinverse; None means "use the noise
    power supplied at solve time", which matches the data-fitting allowance
    of the recovery problem in simulation where the noise level is known.
    """

    prune_ratio: float = 1e-3        # keep |alpha_i| >= prune_ratio * max|alpha|
    convergence_tol: float = 1e-3    # relative L2 change between iterations
    max_iterations: int = 30
    ridge: float | None = None

    def __post_init__(self):
        if not 0.0 < self.prune_ratio < 1.0:
            raise ValueError("prune_ratio must be in (0, 1)")
        if self.convergence_tol <= 0.0:
            raise ValueError("convergence_tol must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.ridge is not None and self.ridge < 0.0:
            raise ValueError("ridge must be nonnegative")


@dataclass(frozen=True)
class IterationRecord:
    """Per-iteration diagnostics of one solve."""

    iteration: int
    support_size: int
    residual: float
    relative_change: float


@dataclass
class SpectrumEstimate:
    """Sparse complex spectrum over the dictionary grid.

    amplitudes is full grid length and exactly zero outside support. The
    support is empty for an all-zero spectrum (degenerate input).
    """

    amplitudes: np.ndarray
    support: np.ndarray
    iterations: int
    converged: bool
    residual: float
    trace: list[IterationRecord] = field(default_factory=list)

    @property
    def support_size(self) -> int:
        return int(self.support.size)


def _atoms(basis: Dictionary | np.ndarray) -> np.ndarray:
    return basis.atoms if isinstance(basis, Dictionary) else np.asarray(basis)


def _data(x: Snapshot | np.ndarray) -> np.ndarray:
    return x.data if isinstance(x, Snapshot) else np.asarray(x)


def fourier_init(basis: Dictionary | np.ndarray, x: Snapshot | np.ndarray) -> np.ndarray:
    """Dense matched-filter spectrum Phi^H x used to initialize the iteration."""
    atoms = _atoms(basis)
    data = _data(x)
    if atoms.shape[0] != data.shape[0]:
        raise ValueError("dictionary and snapshot dimensions differ")
    return atoms.conj().T @ data


def irls_step(phi_sub: np.ndarray, weights: np.ndarray, x: Snapshot | np.ndarray,
              ridge: float) -> np.ndarray:
    """One reweighted minimum-norm update on the retained support.

    weights are the nonnegative diagonal of W; returns the support-restricted
    amplitudes W A^H (A A^H + ridge I)^{-1} x with A = phi_sub W.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or weights.shape[0] != phi_sub.shape[1]:
        raise ValueError("weights must align with the restricted dictionary columns")
    if np.any(weights < 0.0):
        raise ValueError("weights must be nonnegative")
    data = _data(x)
    w2 = weights ** 2
    gram = (phi_sub * w2) @ phi_sub.conj().T
    gram[np.diag_indices_from(gram)] += ridge
    try:
        factor = scipy.linalg.cho_factor(gram, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            "weighted system is singular: regularize or prune") from exc
    y = scipy.linalg.cho_solve(factor, data, check_finite=False)
    return w2 * (phi_sub.conj().T @ y)


def prune_support(amplitudes: np.ndarray, prune_ratio: float) -> np.ndarray:
    """Indices with |alpha_i| >= prune_ratio * max|alpha|; never empty.

    An all-zero input keeps the full index set (with a warning) so the caller
    can finish the iteration and report a degenerate spectrum.
    """
    magnitudes = np.abs(np.asarray(amplitudes))
    if magnitudes.size == 0:
        raise ValueError("cannot prune an empty spectrum")
    peak = magnitudes.max()
    if peak == 0.0:
        warnings.warn("all-zero spectrum: keeping full support", stacklevel=2)
        return np.arange(magnitudes.size)
    return np.flatnonzero(magnitudes >= prune_ratio * peak)


def update_weights(amplitudes_on_support: np.ndarray) -> np.ndarray:
    """Next weighting diagonal: the magnitudes of the current amplitudes."""
    return np.abs(np.asarray(amplitudes_on_support))


def has_converged(alpha_new: np.ndarray, alpha_old: np.ndarray, tol: float) -> bool:
    """Relative L2 change ||new - old|| / ||new|| <= tol (vectors zero-padded to full grid)."""
    norm_new = float(np.linalg.norm(alpha_new))
    if norm_new == 0.0:
        warnings.warn("zero spectrum: converged by degeneracy", stacklevel=2)
        return True
    return float(np.linalg.norm(alpha_new - alpha_old)) / norm_new <= tol


def estimate_spectrum(basis: Dictionary | np.ndarray, x: Snapshot | np.ndarray,
                      cfg: IrlsConfig = IrlsConfig(), noise_power: float = 1.0,
                      keep_trace: bool = False) -> SpectrumEstimate:
    """Full solve: matched-filter init, then reweight/prune until converged.

    The support only ever shrinks: recovery of weak components relies on the
    dense initialization, not on re-admitting pruned indices later.
    """
    atoms = _atoms(basis)
    data = _data(x)
    ridge = cfg.ridge if cfg.ridge is not None else float(noise_power)

    n_atoms = atoms.shape[1]
    alpha_old = fourier_init(atoms, data)
    support = np.arange(n_atoms)
    weights = update_weights(alpha_old)

    alpha_full = np.zeros(n_atoms, dtype=complex)
    alpha_sub = np.zeros(0, dtype=complex)
    converged = False
    records: list[IterationRecord] = []
    iteration = 0
    for iteration in range(1, cfg.max_iterations + 1):
        alpha_sub = irls_step(atoms[:, support], weights, data, ridge)
        keep = prune_support(alpha_sub, cfg.prune_ratio)
        support = support[keep]
        alpha_sub = alpha_sub[keep]
        weights = update_weights(alpha_sub)

        alpha_full = np.zeros(n_atoms, dtype=complex)
        alpha_full[support] = alpha_sub
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            converged = has_converged(alpha_full, alpha_old, cfg.convergence_tol)
        if keep_trace:
            norm_new = float(np.linalg.norm(alpha_full))
            change = (float(np.linalg.norm(alpha_full - alpha_old)) / norm_new
                      if norm_new > 0.0 else 0.0)
            residual = float(np.linalg.norm(data - atoms[:, support] @ alpha_sub))
            records.append(IterationRecord(iteration, support.size, residual, change))
        if converged:
            break
        alpha_old = alpha_full

    residual = float(np.linalg.norm(data - atoms[:, support] @ alpha_sub))
    if not np.any(alpha_full):
        # degenerate zero spectrum: report an empty support
        support = np.arange(0)
    return SpectrumEstimate(alpha_full, support, iteration, converged, residual, records)


def spectrum_to_ccm(est: SpectrumEstimate, basis: Dictionary | np.ndarray,
                    loading: float, label: str = "") -> Covariance:
    """Reconstructed clutter covariance sum_i |alpha_i|^2 a_i a_i^H + loading*I."""
    atoms = _atoms(basis)
    scaled = atoms[:, est.support] * np.abs(est.amplitudes[est.support])
    matrix = scaled @ scaled.conj().T
    matrix = 0.5 * (matrix + matrix.conj().T)
    matrix[np.diag_indices_from(matrix)] += loading
    return Covariance(matrix, label)
