"""Run configuration: JSON schema, validation and defaults.

An empty config file resolves to the reference scenario (cylindrical 4x4
array, 16 pulses, 300 m/s platform at 3 km height, 30 dB CNR, 40 training
cells around a test cell at 1.5x the platform height). Angles are given in
degrees in config files and converted at this boundary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .clutter import GAIN_MODELS, ClutterScenario, default_scenario
from .dictionary import GridSpec, build_grid
from .sparse import IrlsConfig

METHODS = ("sr-rbc", "lsmi", "clairvoyant", "fourier-image")
CURVE_METHODS = ("sr-rbc", "lsmi", "clairvoyant")


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending key."""


DEFAULTS: dict = {
    "scenario": {
        "rings": 4,
        "elements_per_ring": 4,
        "pulses": 16,
        "speed": 300.0,
        "crab_angle_deg": 0.0,
        "pri": 0.25e-3,
        "sample_rate": 5.0e6,
        "wavelength": 0.3,
        "ring_spacing": 0.15,
        "ring_radius": 0.15,
        "height": 3000.0,
        "cnr_db": 30.0,
        "test_range_factor": 1.5,
        "n_scatterers": 360,
        "noise_power": 1.0,
        "gain_model": "isotropic",
    },
    "grid": {
        "zoom_spatial": 4.0,
        "zoom_temporal": 4.0,
    },
    "irls": {
        "prune_ratio": 1e-3,
        "convergence_tol": 1e-3,
        "max_iterations": 30,
        "ridge": None,
    },
    "training_cells": 40,
    "ccm_loading": None,
    "lsmi_loading": None,
    "methods": ["sr-rbc", "lsmi", "clairvoyant", "fourier-image"],
    "target_azimuth_deg": 90.0,
    "output_dir": None,
    "seed": 0,
}

_INT_KEYS = {
    "scenario.rings", "scenario.elements_per_ring", "scenario.pulses",
    "scenario.n_scatterers", "training_cells", "irls.max_iterations", "seed",
}
_OPTIONAL_FLOAT_KEYS = {"irls.ridge", "ccm_loading", "lsmi_loading"}
_STRING_KEYS = {"scenario.gain_model", "output_dir"}


@dataclass(frozen=True)
class RunConfig:
    """Fully-resolved experiment configuration."""

    scenario: ClutterScenario
    grid: GridSpec
    irls: IrlsConfig
    n_training: int
    ccm_loading: float | None
    lsmi_loading: float | None
    methods: tuple[str, ...]
    target_azimuth_deg: float
    output_dir: Path | None
    seed: int
    resolved: dict  # normalized raw dict; echoing it reproduces this config


def _merge(defaults: dict, overrides: dict, path: str = "") -> dict:
    merged = {}
    for key, default in defaults.items():
        here = f"{path}{key}"
        if isinstance(default, dict):
            sub = overrides.get(key, {})
            if not isinstance(sub, dict):
                raise ConfigError(f"{here}: expected an object")
            merged[key] = _merge(default, sub, f"{here}.")
        else:
            merged[key] = overrides.get(key, default)
    unknown = set(overrides) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown key: {path}{sorted(unknown)[0]}")
    return merged


def _check_number(value, key: str, optional: bool = False) -> float | None:
    if value is None and optional:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite")
    return float(value)


def _check_int(value, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    return value


def _validate_types(cfg: dict, path: str = "") -> None:
    for key, value in cfg.items():
        here = f"{path}{key}"
        if isinstance(value, dict):
            _validate_types(value, f"{here}.")
        elif here in _INT_KEYS:
            _check_int(value, here)
        elif here in _OPTIONAL_FLOAT_KEYS:
            _check_number(value, here, optional=True)
        elif here in _STRING_KEYS:
            if value is not None and not isinstance(value, str):
                raise ConfigError(f"{here}: expected a string, got {value!r}")
        elif here == "methods":
            if not isinstance(value, list) or not value:
                raise ConfigError("methods: expected a nonempty list")
            for method in value:
                if method not in METHODS:
                    raise ConfigError(f"methods: unknown method {method!r} "
                                      f"(choose from {', '.join(METHODS)})")
        else:
            _check_number(value, here)


def resolve(raw: dict) -> RunConfig:
    """Merge a raw config dict onto the defaults and build the typed objects."""
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected an object")
    merged = _merge(DEFAULTS, raw)
    _validate_types(merged)

    s = merged["scenario"]
    if s["gain_model"] not in GAIN_MODELS:
        raise ConfigError(f"scenario.gain_model: unknown model {s['gain_model']!r}")
    try:
        scenario = default_scenario(
            crab_angle=math.radians(s["crab_angle_deg"]),
            n_training=merged["training_cells"],
            rings=s["rings"],
            elements_per_ring=s["elements_per_ring"],
            pulses=s["pulses"],
            speed=s["speed"],
            pri=s["pri"],
            sample_rate=s["sample_rate"],
            wavelength=s["wavelength"],
            ring_spacing=s["ring_spacing"],
            ring_radius=s["ring_radius"],
            height=s["height"],
            cnr_db=s["cnr_db"],
            test_range_factor=s["test_range_factor"],
            n_scatterers=s["n_scatterers"],
            noise_power=s["noise_power"],
            gain_model=s["gain_model"],
            seed=merged["seed"],
        )
        grid = build_grid(scenario.geometry, scenario.platform.pulses,
                          merged["grid"]["zoom_spatial"], merged["grid"]["zoom_temporal"])
        irls = IrlsConfig(
            prune_ratio=merged["irls"]["prune_ratio"],
            convergence_tol=merged["irls"]["convergence_tol"],
            max_iterations=merged["irls"]["max_iterations"],
            ridge=merged["irls"]["ridge"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    output_dir = merged["output_dir"]
    return RunConfig(
        scenario=scenario,
        grid=grid,
        irls=irls,
        n_training=merged["training_cells"],
        ccm_loading=merged["ccm_loading"],
        lsmi_loading=merged["lsmi_loading"],
        methods=tuple(merged["methods"]),
        target_azimuth_deg=float(merged["target_azimuth_deg"]),
        output_dir=Path(output_dir) if output_dir else None,
        seed=merged["seed"],
        resolved=merged,
    )


def read_raw(path: str | Path) -> dict:
    """Raw config dict from a JSON file; an empty file means an empty dict."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not text.strip():
        return {}
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path}: top level must be an object")
    return raw


def load_config(path: str | Path) -> RunConfig:
    """Read, validate and resolve a JSON config file; empty files mean defaults."""
    return resolve(read_raw(path))


def dump_config(cfg: RunConfig) -> str:
    """Serialized form of the resolved config; loading it reproduces the run."""
    return json.dumps(cfg.resolved, indent=2, sort_keys=True) + "\n"
