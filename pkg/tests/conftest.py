import numpy as np
import pytest

from cfastap.clutter import ClutterScenario, default_scenario
from cfastap.geometry import ArrayGeometry, PlatformState


@pytest.fixture
def small_scenario() -> ClutterScenario:
    """Tiny scenario (N*M*P = 16) for fast statistical tests."""
    return default_scenario(
        rings=2, elements_per_ring=2, pulses=4,
        n_scatterers=16, n_training=8, seed=7,
    )


@pytest.fixture
def reference_geometry() -> ArrayGeometry:
    return ArrayGeometry(rings=4, elements_per_ring=4, ring_spacing=0.15,
                         ring_radius=0.15, wavelength=0.3)


@pytest.fixture
def reference_platform() -> PlatformState:
    return PlatformState(speed=300.0, crab_angle=0.0, height=3000.0,
                         pri=0.25e-3, pulses=16)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
