"""Conformal-array STAP: clutter simulation, sparse angle-Doppler spectrum
recovery, registration-based training-data compensation and IF-loss evaluation."""

from .clutter import (
    ClutterScenario,
    Covariance,
    Snapshot,
    SpaceTimeTaper,
    clairvoyant_ccm,
    clutter_snapshot,
    clutter_snapshots,
    cnr_scale,
    default_scenario,
    iso_range_scatterers,
    training_cell_indices,
)
from .compensation import (
    PipelineRecord,
    Transform,
    apply_transform,
    lsmi,
    sr_rbc_pipeline,
    training_lsmi,
    transform_matrix,
)
from .config import ConfigError, RunConfig, load_config
from .dictionary import Dictionary, GridSpec, build_dictionary, build_grid, mutual_coherence
from .evaluation import (
    IfLossCurve,
    adaptive_weight,
    band_energy_fraction,
    broadside_target,
    clutter_notch_doppler,
    clutter_ridge_mask,
    doppler_sweep,
    fourier_spectrum_image,
    if_loss,
    if_loss_curve,
    mean_off_notch_loss,
    sparse_spectrum_image,
)
from .geometry import (
    AngleVector,
    ArrayGeometry,
    PlatformState,
    element_position,
    element_positions,
    elevation_for_slant_range,
    platform_velocity,
    wavevector,
)
from .sparse import (
    IrlsConfig,
    SpectrumEstimate,
    estimate_spectrum,
    fourier_init,
    has_converged,
    irls_step,
    prune_support,
    spectrum_to_ccm,
    update_weights,
)
from .steering import (
    SteeringVector,
    doppler_frequency,
    space_time_steering,
    spatial_steering,
    temporal_steering,
)

__version__ = "0.1.0"
