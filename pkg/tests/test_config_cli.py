import json
import math

import numpy as np
import pytest

from cfastap.cli import check_thresholds, main, run_experiment
from cfastap.config import ConfigError, dump_config, load_config, resolve

TINY = {
    "scenario": {"rings": 2, "elements_per_ring": 2, "pulses": 4, "n_scatterers": 16},
    "grid": {"zoom_spatial": 2.0, "zoom_temporal": 2.0},
    "training_cells": 8,
}


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload) if payload is not None else "")
    return path


def test_empty_config_resolves_to_reference_defaults(tmp_path):
    cfg = load_config(write_config(tmp_path, None))
    sc = cfg.scenario
    assert sc.geometry.rings == 4
    assert sc.geometry.elements_per_ring == 4
    assert sc.platform.pulses == 16
    assert sc.platform.speed == 300.0
    assert sc.platform.pri == 0.25e-3
    assert sc.geometry.wavelength == 0.3
    assert sc.geometry.ring_spacing == 0.15
    assert sc.geometry.ring_radius == 0.15
    assert sc.platform.height == 3000.0
    assert sc.cnr_db == 30.0
    assert cfg.n_training == 40
    assert cfg.grid.n_atoms == 4096
    assert cfg.methods == ("sr-rbc", "lsmi", "clairvoyant", "fourier-image")


def test_crab_angle_override_in_degrees(tmp_path):
    cfg = load_config(write_config(tmp_path, {"scenario": {"crab_angle_deg": 30.0}}))
    assert cfg.scenario.platform.crab_angle == pytest.approx(math.radians(30.0))


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(ConfigError, match="unknown key: scenario.votls"):
        load_config(write_config(tmp_path, {"scenario": {"votls": 1}}))
    with pytest.raises(ConfigError, match="unknown key: frobnicate"):
        load_config(write_config(tmp_path, {"frobnicate": True}))


def test_wrong_type_names_the_key(tmp_path):
    with pytest.raises(ConfigError, match="scenario.cnr_db"):
        load_config(write_config(tmp_path, {"scenario": {"cnr_db": "x"}}))
    with pytest.raises(ConfigError, match="training_cells"):
        load_config(write_config(tmp_path, {"training_cells": 2.5}))
    with pytest.raises(ConfigError, match="methods"):
        load_config(write_config(tmp_path, {"methods": ["bogus"]}))


def test_invalid_json_and_missing_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(bad)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.json")


def test_scenario_invariant_violation_surfaces_as_config_error(tmp_path):
    with pytest.raises(ConfigError, match="scatterers"):
        load_config(write_config(tmp_path, {"scenario": {"n_scatterers": 8}}))


def test_config_echo_round_trips(tmp_path):
    cfg = load_config(write_config(tmp_path, TINY))
    echo = tmp_path / "echo.json"
    echo.write_text(dump_config(cfg))
    again = load_config(echo)
    assert again.resolved == cfg.resolved


def test_run_experiment_writes_expected_artifacts(tmp_path):
    raw = dict(TINY)
    raw["output_dir"] = str(tmp_path / "out")
    raw["methods"] = ["sr-rbc", "lsmi", "clairvoyant", "fourier-image"]
    cfg = resolve(raw)
    result = run_experiment(cfg, emit_trace=True)
    out = tmp_path / "out"
    for name in ("config.json", "manifest.json", "if_loss.csv",
                 "spectrum_fourier.csv", "spectrum_fourier.meta.json",
                 "spectrum_sr_rbc.csv", "spectrum_sr_rbc.meta.json",
                 "irls_trace.csv"):
        assert (out / name).exists(), name

    header = (out / "if_loss.csv").read_text().splitlines()[0]
    assert header == "doppler,sr-rbc,lsmi,clairvoyant"
    data = np.loadtxt(out / "if_loss.csv", delimiter=",", skiprows=1)
    assert data.shape == (101, 4)
    # clairvoyant column is 0 dB
    np.testing.assert_allclose(data[:, 3], 0.0, atol=1e-9)

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == cfg.seed
    assert "sr_rbc_minus_lsmi_db" in manifest["metrics"]
    assert len(manifest["cells"]) == 9

    image = np.loadtxt(out / "spectrum_fourier.csv", delimiter=",")
    assert image.shape == (cfg.grid.n_doppler, cfg.grid.n_azimuth)
    meta = json.loads((out / "spectrum_fourier.meta.json").read_text())
    assert len(meta["azimuth_rad"]) == cfg.grid.n_azimuth


def test_run_experiment_byte_identical_reruns(tmp_path):
    csvs = []
    for run in ("a", "b"):
        raw = dict(TINY)
        raw["output_dir"] = str(tmp_path / run)
        cfg = resolve(raw)
        run_experiment(cfg, workers=2 if run == "b" else 1)
        csvs.append({name.name: name.read_bytes()
                     for name in sorted((tmp_path / run).glob("*.csv"))})
    assert csvs[0].keys() == csvs[1].keys()
    for name in csvs[0]:
        assert csvs[0][name] == csvs[1][name], name


def test_cli_exit_codes(tmp_path, capsys):
    # config error
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert main(["run", str(bad)]) == 1
    assert "config error" in capsys.readouterr().err

    # success
    cfg_path = write_config(tmp_path, {**TINY, "methods": ["clairvoyant"]})
    assert main(["run", str(cfg_path), "--output-dir", str(tmp_path / "ok")]) == 0
    printed = capsys.readouterr().out
    assert "mean_off_notch_loss_db[clairvoyant]" in printed

    # check-threshold failure: demand an absurd improvement
    cfg_path = write_config(tmp_path, TINY, name="tiny.json")
    code = main(["run", str(cfg_path), "--check", "--check-min-gap-db", "1e9"])
    assert code == 3
    assert "check failed" in capsys.readouterr().err

    # usage errors map to config errors
    assert main(["run"]) == 1


def test_cli_output_dir_override_is_echoed(tmp_path):
    cfg_path = write_config(tmp_path, {**TINY, "methods": ["clairvoyant"]})
    out = tmp_path / "cli-out"
    assert main(["run", str(cfg_path), "--output-dir", str(out)]) == 0
    echoed = json.loads((out / "config.json").read_text())
    assert echoed["output_dir"] == str(out)
    # loading the echo reproduces the same run configuration
    again = resolve(echoed)
    assert again.resolved == echoed


def test_check_thresholds_requires_both_methods(tmp_path):
    raw = {**TINY, "methods": ["clairvoyant"]}
    result = run_experiment(resolve(raw))
    failures = check_thresholds(result, 3.0, 5.0)
    assert failures and "requires both" in failures[0]
