"""Command-line experiment runner.

`cfastap run <config.json>` simulates the configured scenario, estimates the
test-cell covariance with each requested method, and writes IF-loss curves,
spectrum images, the resolved config echo and a run manifest to the output
directory. Outputs are byte-identical for identical config and seed.

Exit codes: 0 success, 1 config error, 2 numerical failure, 3 check-threshold
failure (with --check).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .clutter import clairvoyant_ccm, clutter_snapshot
from .compensation import PipelineRecord, sr_rbc_pipeline, training_lsmi
from .config import ConfigError, RunConfig, dump_config, read_raw, resolve
from .dictionary import build_dictionary
from .evaluation import (
    IfLossCurve,
    clutter_notch_doppler,
    doppler_sweep,
    fourier_spectrum_image,
    if_loss_curve,
    mean_off_notch_loss,
    sparse_spectrum_image,
)
from .geometry import AngleVector

CSV_FMT = "%.17g"


class ExperimentError(RuntimeError):
    """A numerical stage of the experiment failed."""


@contextmanager
def _stage(name: str):
    try:
        yield
    except (np.linalg.LinAlgError, FloatingPointError, RuntimeError, ValueError) as exc:
        raise ExperimentError(f"stage '{name}' failed: {exc}") from exc


@dataclass
class ExperimentResult:
    curves: dict[str, IfLossCurve] = field(default_factory=dict)
    images: dict[str, np.ndarray] = field(default_factory=dict)
    manifest: dict = field(default_factory=dict)
    output_dir: Path | None = None


def run_experiment(cfg: RunConfig, workers: int = 1,
                   emit_trace: bool = False) -> ExperimentResult:
    """Run every configured method and (optionally) write the artifact files."""
    start = time.perf_counter()
    sc = cfg.scenario
    test = sc.test_cell_index
    target = AngleVector(math.radians(cfg.target_azimuth_deg), sc.elevation(test))
    dopplers = doppler_sweep()
    scenario_id = f"seed{cfg.seed}"
    record = PipelineRecord(keep_trace=emit_trace)
    result = ExperimentResult(output_dir=cfg.output_dir)

    with _stage("clairvoyant covariance"):
        true_cov = clairvoyant_ccm(sc, test)

    for method in cfg.methods:
        if method == "clairvoyant":
            r_hat = true_cov
        elif method == "lsmi":
            with _stage("lsmi training"):
                r_hat = training_lsmi(sc, cfg.n_training, cfg.lsmi_loading)
        elif method == "sr-rbc":
            with _stage("sr-rbc pipeline"):
                r_hat = sr_rbc_pipeline(sc, cfg.irls, cfg.n_training,
                                        lsmi_loading=cfg.lsmi_loading,
                                        ccm_loading=cfg.ccm_loading,
                                        grid=cfg.grid, workers=workers, record=record)
            result.images["sr_rbc"] = sparse_spectrum_image(record.test_estimate, cfg.grid)
        elif method == "fourier-image":
            with _stage("fourier image"):
                basis = build_dictionary(sc, test, cfg.grid)
                result.images["fourier"] = fourier_spectrum_image(
                    basis, clutter_snapshot(sc, test))
            continue
        with _stage(f"if-loss curve ({method})"):
            result.curves[method] = if_loss_curve(sc, r_hat, target, dopplers,
                                                  method=method, scenario_id=scenario_id,
                                                  true_cov=true_cov)

    notch = clutter_notch_doppler(sc, target)
    metrics: dict = {"notch_doppler": notch}
    for method, curve in result.curves.items():
        metrics[f"mean_off_notch_loss_db[{method}]"] = mean_off_notch_loss(curve, notch)
    if "sr-rbc" in result.curves and "lsmi" in result.curves:
        metrics["sr_rbc_minus_lsmi_db"] = (
            metrics["mean_off_notch_loss_db[sr-rbc]"]
            - metrics["mean_off_notch_loss_db[lsmi]"])

    echo = dump_config(cfg)
    result.manifest = {
        "config_sha256": hashlib.sha256(echo.encode()).hexdigest(),
        "seed": cfg.seed,
        "methods": list(cfg.methods),
        "test_cell_index": test,
        "test_slant_range_m": sc.range_cells[test],
        "metrics": metrics,
        "cells": [{**vars(c), "residual": None if math.isnan(c.residual) else c.residual}
                  for c in record.cells],
        "wall_time_s": 0.0,
    }

    if cfg.output_dir is not None:
        _write_outputs(cfg, result, record, echo)
    result.manifest["wall_time_s"] = time.perf_counter() - start
    if cfg.output_dir is not None:
        _write_json(cfg.output_dir / "manifest.json", result.manifest)
    return result


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_outputs(cfg: RunConfig, result: ExperimentResult,
                   record: PipelineRecord, echo: str) -> None:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(echo)

    if result.curves:
        methods = [m for m in cfg.methods if m in result.curves]
        columns = [result.curves[methods[0]].target_dopplers]
        columns += [result.curves[m].loss_db for m in methods]
        np.savetxt(out / "if_loss.csv", np.column_stack(columns), delimiter=",",
                   header=",".join(["doppler"] + methods), comments="", fmt=CSV_FMT)

    sc = cfg.scenario
    for name, image in result.images.items():
        np.savetxt(out / f"spectrum_{name}.csv", image, delimiter=",", fmt=CSV_FMT)
        _write_json(out / f"spectrum_{name}.meta.json", {
            "rows": "doppler",
            "cols": "azimuth",
            "doppler_bins": list(cfg.grid.dopplers),
            "azimuth_rad": list(cfg.grid.azimuths),
            "normalization": "power in dB relative to the image peak",
            "floor_db": -120.0,
            "range_index": sc.test_cell_index,
        })

    if record.keep_trace:
        lines = ["cell,iteration,support_size,residual,relative_change"]
        for cell in sorted(record.traces):
            for rec in record.traces[cell]:
                lines.append(f"{cell},{rec.iteration},{rec.support_size},"
                             f"{rec.residual:.17g},{rec.relative_change:.17g}")
        (out / "irls_trace.csv").write_text("\n".join(lines) + "\n")


def check_thresholds(result: ExperimentResult, min_gap_db: float,
                     max_loss_db: float) -> list[str]:
    """Threshold checks on the run metrics; returns failure messages (empty = pass)."""
    metrics = result.manifest.get("metrics", {})
    failures = []
    gap = metrics.get("sr_rbc_minus_lsmi_db")
    if gap is None:
        failures.append("check requires both 'sr-rbc' and 'lsmi' methods in the run")
        return failures
    if gap < min_gap_db:
        failures.append(f"sr-rbc improves on lsmi by {gap:.2f} dB "
                        f"(required >= {min_gap_db:.2f} dB)")
    sr_loss = metrics["mean_off_notch_loss_db[sr-rbc]"]
    if sr_loss < -max_loss_db:
        failures.append(f"sr-rbc mean off-notch loss {sr_loss:.2f} dB "
                        f"(required >= {-max_loss_db:.2f} dB)")
    return failures


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; map them to config errors
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cfastap",
                     description="Conformal-array STAP clutter simulation and "
                                 "sparse-recovery compensation experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment from a JSON config file")
    run.add_argument("config", help="path to the config file (empty file = defaults)")
    run.add_argument("--output-dir", help="directory for artifact files "
                                          "(overrides the config)")
    run.add_argument("--workers", type=int, default=1,
                     help="concurrent per-range-cell workers (default 1)")
    run.add_argument("--check", action="store_true",
                     help="verify improvement thresholds and exit 3 on failure")
    run.add_argument("--check-min-gap-db", type=float, default=3.0,
                     help="required sr-rbc over lsmi mean improvement (default 3 dB)")
    run.add_argument("--check-max-loss-db", type=float, default=5.0,
                     help="allowed sr-rbc mean off-notch loss magnitude (default 5 dB)")
    run.add_argument("--emit-trace", action="store_true",
                     help="write per-iteration solver diagnostics")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        raw = read_raw(args.config)
        if args.output_dir:
            raw["output_dir"] = args.output_dir
        cfg = resolve(raw)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    try:
        result = run_experiment(cfg, workers=args.workers, emit_trace=args.emit_trace)
    except ExperimentError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2

    metrics = result.manifest["metrics"]
    for key in sorted(metrics):
        print(f"{key} = {metrics[key]:.4f}")
    if result.output_dir is not None:
        print(f"artifacts written to {result.output_dir}")

    if args.check:
        failures = check_thresholds(result, args.check_min_gap_db, args.check_max_loss_db)
        for message in failures:
            print(f"check failed: {message}", file=sys.stderr)
        if failures:
            return 3
        print("check passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
