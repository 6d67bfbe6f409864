"""Registration of training data to the test cell and covariance estimation.

Each training cell gets a transform T that maps its reconstructed clutter
covariance onto the test cell's reconstruction, T R_k T^H = R_t, built from
the two eigendecompositions. Transformed training snapshots then behave
(nearly) stationary with the test cell and feed a loaded sample covariance.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .clutter import (
    ClutterScenario,
    Covariance,
    Snapshot,
    clutter_snapshot,
    training_cell_indices,
)
from .dictionary import Dictionary, GridSpec, build_dictionary, build_grid
from .sparse import IrlsConfig, SpectrumEstimate, estimate_spectrum, spectrum_to_ccm


@dataclass(frozen=True)
class Transform:
    """Linear map rendering one cell's clutter statistics stationary with another's."""

    matrix: np.ndarray
    source_range: int
    target_range: int


def _sorted_eig(cov: Covariance | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition with descending eigenvalues and a fixed phase convention.

    Each eigenvector is rotated so its first nonnegligible component is real
    positive, which makes the transform a deterministic function of its input.
    """
    matrix = cov.matrix if isinstance(cov, Covariance) else np.asarray(cov)
    matrix = 0.5 * (matrix + matrix.conj().T)
    eigvals, eigvecs = np.linalg.eigh(matrix)
    eigvals = eigvals[::-1]
    eigvecs = eigvecs[:, ::-1]
    for col in range(eigvecs.shape[1]):
        v = eigvecs[:, col]
        lead = np.flatnonzero(np.abs(v) > 1e-12)
        if lead.size:
            pivot = v[lead[0]]
            eigvecs[:, col] = v * (pivot.conjugate() / abs(pivot))
    return eigvals, eigvecs


def transform_matrix(r_source: Covariance, r_target: Covariance,
                     source_range: int = -1, target_range: int = -1) -> Transform:
    """Transform T with T R_source T^H = R_target for positive definite inputs.

    T = V_t L_t^{1/2} L_s^{-1/2} V_s^H with eigenpairs matched by descending
    eigenvalue rank. Both covariances must be loaded (positive definite).
    """
    vals_s, vecs_s = _sorted_eig(r_source)
    vals_t, vecs_t = _sorted_eig(r_target)
    if vals_s.min() <= 0.0 or vals_t.min() <= 0.0:
        raise np.linalg.LinAlgError(
            "covariance not positive definite: load covariance before transforming")
    matrix = (vecs_t * np.sqrt(vals_t)) @ (vecs_s / np.sqrt(vals_s)).conj().T
    return Transform(matrix, source_range, target_range)


def apply_transform(transform: Transform, snap: Snapshot) -> Snapshot:
    """Transformed snapshot T x (covariance maps to T R T^H)."""
    return Snapshot(transform.matrix @ snap.data, snap.range_index)


def lsmi(snapshots: list[Snapshot], loading: float, label: str = "lsmi") -> Covariance:
    """Loaded sample matrix: mean of x x^H over the snapshots plus loading*I."""
    if not snapshots:
        raise ValueError("lsmi needs at least one snapshot")
    stacked = np.stack([s.data for s in snapshots], axis=1)
    matrix = stacked @ stacked.conj().T / len(snapshots)
    matrix = 0.5 * (matrix + matrix.conj().T)
    matrix[np.diag_indices_from(matrix)] += loading
    return Covariance(matrix, label)


def training_lsmi(sc: ClutterScenario, n_training: int,
                  loading: float | None = None) -> Covariance:
    """Plain LSMI baseline over the raw (untransformed) training snapshots."""
    delta = sc.noise_power if loading is None else loading
    cells = training_cell_indices(len(sc.range_cells), sc.test_cell_index, n_training)
    snapshots = [clutter_snapshot(sc, k) for k in cells]
    return lsmi(snapshots, delta)


@dataclass
class CellDiagnostic:
    """Per-cell outcome of the registration pipeline."""

    cell_index: int
    iterations: int = 0
    support_size: int = 0
    converged: bool = False
    residual: float = float("nan")
    dropped: bool = False
    error: str = ""


@dataclass
class PipelineRecord:
    """Optional collector for pipeline internals (diagnostics, test spectrum)."""

    cells: list[CellDiagnostic] = field(default_factory=list)
    test_estimate: SpectrumEstimate | None = None
    keep_trace: bool = False
    traces: dict[int, list] = field(default_factory=dict)


def _cell_reconstruction(sc: ClutterScenario, k: int, grid: GridSpec, cfg: IrlsConfig,
                         ccm_loading: float, keep_trace: bool
                         ) -> tuple[Snapshot, SpectrumEstimate, Covariance, Dictionary]:
    snap = clutter_snapshot(sc, k)
    basis = build_dictionary(sc, k, grid)
    est = estimate_spectrum(basis, snap, cfg, noise_power=sc.noise_power,
                            keep_trace=keep_trace)
    ccm = spectrum_to_ccm(est, basis, ccm_loading, label=f"reconstructed[{k}]")
    return snap, est, ccm, basis


def sr_rbc_pipeline(sc: ClutterScenario, cfg: IrlsConfig = IrlsConfig(),
                    n_training: int = 40, lsmi_loading: float | None = None,
                    ccm_loading: float | None = None, grid: GridSpec | None = None,
                    workers: int = 1, record: PipelineRecord | None = None) -> Covariance:
    """Test-cell covariance estimate via sparse-recovery registration.

    Per training cell: estimate the sparse spectrum from the cell's single
    snapshot, reconstruct its clutter covariance, build the transform toward
    the test cell's reconstruction and transform the snapshot. The loaded
    sample covariance of the transformed snapshots is the estimate.

    A failing training cell is dropped with a warning; the run fails when
    more than 10% of the cells drop. n_training = 0 falls back to the test
    cell's own reconstruction.
    """
    delta = sc.noise_power if lsmi_loading is None else lsmi_loading
    beta = sc.noise_power if ccm_loading is None else ccm_loading
    if grid is None:
        grid = build_grid(sc.geometry, sc.platform.pulses)
    keep_trace = record.keep_trace if record is not None else False

    test = sc.test_cell_index
    _, est_t, r_test, _ = _cell_reconstruction(sc, test, grid, cfg, beta, keep_trace)
    if record is not None:
        record.test_estimate = est_t
        record.cells.append(CellDiagnostic(test, est_t.iterations, est_t.support_size,
                                           est_t.converged, est_t.residual))
        if keep_trace:
            record.traces[test] = est_t.trace
    if n_training == 0:
        return Covariance(r_test.matrix, "sr-rbc")

    cells = training_cell_indices(len(sc.range_cells), test, n_training)

    def run_cell(k: int) -> tuple[int, Snapshot | None, SpectrumEstimate | None, str]:
        try:
            snap, est, ccm, _ = _cell_reconstruction(sc, k, grid, cfg, beta, keep_trace)
            transform = transform_matrix(ccm, r_test, source_range=k, target_range=test)
            return k, apply_transform(transform, snap), est, ""
        except (np.linalg.LinAlgError, ValueError) as exc:
            return k, None, None, str(exc)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_cell, cells))
    else:
        results = [run_cell(k) for k in cells]

    transformed: list[Snapshot] = []
    dropped = 0
    for k, snap, est, error in sorted(results, key=lambda item: item[0]):
        diag = CellDiagnostic(k)
        if snap is None:
            dropped += 1
            diag.dropped = True
            diag.error = error
            warnings.warn(f"dropping training cell {k}: {error}", stacklevel=2)
        else:
            transformed.append(snap)
            diag.iterations = est.iterations
            diag.support_size = est.support_size
            diag.converged = est.converged
            diag.residual = est.residual
            if record is not None and keep_trace:
                record.traces[k] = est.trace
        if record is not None:
            record.cells.append(diag)
    if dropped > 0.1 * len(cells):
        raise RuntimeError(f"{dropped}/{len(cells)} training cells failed; aborting")
    return lsmi(transformed, delta, label="sr-rbc")
