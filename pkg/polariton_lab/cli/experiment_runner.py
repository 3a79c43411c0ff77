#!/usr/bin/env python3
"""
Experiment Runner - Reproducible sweeps of the cavity magnon-polariton model.

Each run is described by a versioned RunConfig (JSON or YAML). Command-line
flags override individual fields of the file, or describe the whole run when
no file is given. Outputs are deterministic: the same configuration produces
byte-identical files.
"""

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import yaml
from pydantic import ValidationError

AGENT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
sys.path.insert(0, AGENT_ROOT)

from lib import llg_dynamics, quantum_io, spectra_io, susceptibility  # noqa: E402
from lib.analysis import fitting  # noqa: E402
from lib.analysis.spectra import extract_splitting  # noqa: E402
from lib.params import GHZ, MHZ, field_for_resonance, kittel_frequency, reference_preset  # noqa: E402
from shared.errors import ConfigError, PolaritonError, UnresolvedSplittingError  # noqa: E402
from shared.logger import get_logger, setup_logging  # noqa: E402
from shared.models import DriveState, RunConfig, SpectralMap, SystemParams  # noqa: E402

setup_logging()
logger = get_logger("ExperimentRunner")

SUBCOMMANDS = {
    "sweep-field": "field-sweep",
    "sweep-phase": "phase-sweep",
    "map-delta-phi": "delta-phi-map",
    "llg-cone": "llg-cone",
    "fit": "fit",
    "ingest": "ingest",
    "chi-curve": "chi-curve",
}

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


# =============================================================================
# Configuration loading
# =============================================================================


def _deep_merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _read_config_file(path: Path) -> Dict[str, Any]:
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() in (".yaml", ".yml"):
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
            raise ConfigError(f"{path}: malformed YAML", [f"{where}: {getattr(e, 'problem', e)}"])
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: malformed JSON", [f"line {e.lineno}, column {e.colno}: {e.msg}"])
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def load_run_config(path: Optional[str], overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Parse a config file (optional) and apply flag overrides on top of it.

    Every problem is reported as a ConfigError whose diagnostics name the
    offending field by its dotted path.
    """
    data = _read_config_file(Path(path)) if path else {}
    overrides = overrides or {}
    if "sweep" in overrides and "sweep" in data and data["sweep"] != overrides["sweep"]:
        raise ConfigError(
            f"subcommand runs '{overrides['sweep']}' but the config file describes '{data['sweep']}'"
        )
    data = _deep_merge(data, overrides)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        diagnostics = []
        for err in e.errors():
            where = ".".join(str(p) for p in err["loc"]) or "<root>"
            diagnostics.append(f"{where}: {err['msg']}")
        raise ConfigError("invalid run configuration", diagnostics)


# =============================================================================
# Runner
# =============================================================================


class ExperimentRunner:
    """Resolves a RunConfig into model parameters and writes the sweep outputs."""

    def __init__(self, run_config: RunConfig):
        self.run_config = run_config
        self.params, self.drive = self._resolve()
        self.out_dir = Path(run_config.output.directory)
        self.stem = run_config.output.stem or run_config.recipe or run_config.sweep

    def _resolve(self):
        rc = self.run_config
        if rc.preset == "reference":
            params, base = reference_preset()
        else:
            params, base = None, DriveState()
        magnet = rc.magnet or params.magnet
        cavity = rc.cavity or params.cavity
        coupling = rc.coupling or params.coupling
        params = SystemParams(magnet=magnet, cavity=cavity, coupling=coupling)

        probe_power = rc.drive.probe_power_W if rc.drive.probe_power_W is not None else base.probe_power
        drive = DriveState(
            delta=rc.drive.delta,
            phi=math.radians(rc.drive.phi_deg),
            h0_sign=rc.drive.h0_sign,
            mu0_H0=field_for_resonance(magnet, cavity.omega_c),
            probe_power=probe_power,
        )
        return params, drive

    def _header(self) -> Dict[str, Any]:
        return {"run_config": self.run_config.model_dump(mode="json")}

    def _path(self, suffix: str = "", ext: str = "csv") -> Path:
        return self.out_dir / f"{self.stem}{suffix}.{ext}"

    def _frequencies(self) -> np.ndarray:
        return self.params.cavity.omega_c + self.run_config.detuning_MHz.values() * MHZ

    def _write_map(self, smap: SpectralMap) -> List[Path]:
        written = [spectra_io.write_spectral_map(self._path(), smap, self._header())]
        if self.run_config.output.pgm:
            written.append(spectra_io.write_pgm(self._path("", "pgm"), smap, "magnitude"))
            if self.run_config.output.phase and smap.quantity == "s11":
                written.append(spectra_io.write_pgm(self._path("_phase", "pgm"), smap, "phase"))
        return written

    # -------------------------------------------------------------------------

    def field_sweep(self) -> List[Path]:
        rc = self.run_config
        if rc.field_mT is None:
            fields = np.array([self.drive.mu0_H0])
        else:
            fields = rc.field_mT.values() * 1e-3
        smap = quantum_io.field_sweep_map(self.params, self.drive, fields, self._frequencies())
        written = self._write_map(smap)

        if rc.field_mT is None:
            try:
                splitting = extract_splitting(self.params, self.drive)
                logger.info("splitting_extracted", recipe=self.stem, splitting_mhz=round(splitting / MHZ, 4))
            except UnresolvedSplittingError as e:
                logger.warning("splitting_extracted", recipe=self.stem, error=str(e))

        if rc.overlay is not None:
            branches = quantum_io.branch_overlay(
                self.params, self.drive, fields, rc.overlay, quadrature_order=rc.quadrature_order
            )
            rows = [
                [f, a, b]
                for f, a, b in zip(fields, np.atleast_1d(branches.omega_a), np.atleast_1d(branches.omega_b))
            ]
            header = self._header()
            header["overlay"] = rc.overlay
            written.append(
                spectra_io.write_table(self._path("_overlay"), ["mu0_H0", "omega_a", "omega_b"], rows, header)
            )
        return written

    def phase_sweep(self) -> List[Path]:
        rc = self.run_config
        phis = np.radians(rc.phi_deg.values())
        smap = quantum_io.phase_sweep_map(
            self.params, self.drive.delta, phis, self._frequencies(), self.drive.h0_sign
        )
        return self._write_map(smap)

    def delta_phi_map(self) -> List[Path]:
        rc = self.run_config
        smap = quantum_io.splitting_map(
            self.params,
            rc.delta.values(),
            np.radians(rc.phi_deg.values()),
            self.drive.h0_sign,
            rc.theory,
            quadrature_order=rc.quadrature_order,
        )
        return self._write_map(smap)

    def llg_cone(self) -> List[Path]:
        rc = self.run_config
        llg = rc.llg
        magnet = self.params.magnet
        if llg.alpha is not None:
            magnet = magnet.model_copy(update={"alpha": llg.alpha})
        omega0 = kittel_frequency(magnet, self.drive)
        omega_drive = llg.drive_over_kittel * omega0
        t_end, dt = llg_dynamics.plan_integration(
            magnet,
            omega0,
            omega_drive,
            settle_decay_times=llg.settle_decay_times,
            window_periods=llg.window_periods,
            steps_per_period=llg.steps_per_period,
        )
        # settled window is the last window_periods drive periods
        period = 2.0 * math.pi / omega_drive
        settle_fraction = min(1.0, llg.window_periods * period / t_end)
        phis = np.radians(rc.phi_deg.values())
        cones = llg_dynamics.phi_sweep_cones(
            magnet,
            self.drive,
            phis,
            llg.h_amplitude_ratio * magnet.Ms,
            omega_drive,
            t_end,
            dt,
            settle_fraction=settle_fraction,
        )
        rows = []
        for phi, cone in zip(phis, cones):
            sign = 0.0 if cone.handedness is None else (1.0 if cone.handedness == "with-field" else -1.0)
            rows.append([phi, cone.cone_angle, sign, cone.ellipticity])
        header = self._header()
        header["integration"] = {"t_end_s": t_end, "dt_s": dt, "alpha": magnet.alpha}
        return [
            spectra_io.write_table(
                self._path(), ["phi", "cone_angle", "handedness_sign", "ellipticity"], rows, header
            )
        ]

    def fit(self) -> List[Path]:
        source = self.run_config.fit
        spectra = spectra_io.ingest_spectra(source.input, source.format)
        fits = [fitting.fit_lorentzian(s, linear_baseline=source.linear_baseline) for s in spectra]
        labels = [str(s.metadata.get("axis1", k)) for k, s in enumerate(spectra)]
        if source.average and len(fits) > 1:
            fits.append(fitting.average_cavity_fits(fits))
            labels.append("average")
        rows: List[List[Any]] = []
        for label, f in zip(labels, fits):
            rows.append([label, f.center, f.hwhm, f.depth, f.baseline, f.slope, f.residual_norm])
            logger.info(
                "fit_converged",
                file=source.input,
                hwhm_mhz=round(f.hwhm / MHZ, 6),
            )
        columns = ["spectrum", "center", "hwhm", "depth", "baseline", "slope", "residual_norm"]
        return [spectra_io.write_table(self._path(), columns, rows, self._header())]

    def ingest(self) -> List[Path]:
        source = self.run_config.fit
        spectra = spectra_io.ingest_spectra(source.input, source.format)
        rows: List[List[Any]] = []
        for k, s in enumerate(spectra):
            axis1 = s.metadata.get("axis1", float(k))
            for w, value in zip(s.freq_grid, s.s11):
                rows.append([axis1, w, abs(value), float(np.angle(value))])
        return [spectra_io.write_table(self._path(), ["axis1", "axis2", "mag", "phase"], rows, self._header())]

    def chi_curve(self) -> List[Path]:
        rc = self.run_config
        magnet = self.params.magnet
        omega = rc.frequency_GHz.values() * GHZ
        omega0 = kittel_frequency(magnet, self.drive)
        sign = self.drive.h0_sign
        damped = magnet.eta_kittel > 0
        chi_plus = susceptibility.chi_circular(magnet, omega0, omega, +1, sign, damped=damped)
        chi_minus = susceptibility.chi_circular(magnet, omega0, omega, -1, sign, damped=damped)
        rows = [
            [w, complex(p).real, complex(p).imag, complex(m).real, complex(m).imag]
            for w, p, m in zip(omega, np.atleast_1d(chi_plus), np.atleast_1d(chi_minus))
        ]
        columns = ["omega", "chi_plus_re", "chi_plus_im", "chi_minus_re", "chi_minus_im"]
        header = self._header()
        header["omega0"] = omega0
        return [spectra_io.write_table(self._path(), columns, rows, header)]

    # -------------------------------------------------------------------------

    def execute(self) -> List[Path]:
        handlers = {
            "field-sweep": self.field_sweep,
            "phase-sweep": self.phase_sweep,
            "delta-phi-map": self.delta_phi_map,
            "llg-cone": self.llg_cone,
            "fit": self.fit,
            "ingest": self.ingest,
            "chi-curve": self.chi_curve,
        }
        return handlers[self.run_config.sweep]()


def run(run_config: RunConfig) -> int:
    """Execute one run. Returns a process exit code."""
    started = time.perf_counter()
    logger.info("run_start", sweep=run_config.sweep, recipe=run_config.recipe)
    try:
        written = ExperimentRunner(run_config).execute()
    except ConfigError as e:
        logger.error("run_failed", sweep=run_config.sweep, error=str(e))
        return EXIT_CONFIG
    except FileNotFoundError as e:
        logger.error("run_failed", sweep=run_config.sweep, error=str(e))
        return EXIT_CONFIG
    except (PolaritonError, ValueError) as e:
        logger.error("run_failed", sweep=run_config.sweep, error=str(e))
        return EXIT_FAILED
    logger.info(
        "run_complete",
        sweep=run_config.sweep,
        recipe=run_config.recipe,
        points=len(written),
        duration_s=round(time.perf_counter() - started, 2),
    )
    return EXIT_OK


# =============================================================================
# Command line
# =============================================================================


def _grid(values: Optional[List[float]]) -> Optional[Dict[str, Any]]:
    if values is None:
        return None
    start, stop, points = values
    if points != int(points):
        raise ConfigError(f"grid point count must be an integer, got {points}")
    return {"start": start, "stop": stop, "points": int(points)}


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {"sweep": SUBCOMMANDS[args.command]}
    drive = {
        key: value
        for key, value in (
            ("delta", args.delta),
            ("phi_deg", args.phi_deg),
            ("h0_sign", args.h0_sign),
            ("probe_power_W", args.probe_power),
        )
        if value is not None
    }
    if drive:
        overrides["drive"] = drive

    for key, flag in (
        ("field_mT", args.field_mT),
        ("detuning_MHz", args.detuning_MHz),
        ("phi_deg", args.phi_grid),
        ("delta", args.delta_grid),
        ("frequency_GHz", args.frequency_GHz),
    ):
        grid = _grid(flag)
        if grid is not None:
            overrides[key] = grid

    if args.recipe is not None:
        overrides["recipe"] = args.recipe
    if args.theory is not None:
        overrides["theory"] = args.theory
    if args.overlay is not None:
        overrides["overlay"] = args.overlay
    if args.quadrature_order is not None:
        overrides["quadrature_order"] = args.quadrature_order

    output = {
        key: value
        for key, value in (
            ("directory", args.output),
            ("stem", args.stem),
            ("phase", args.phase),
            ("pgm", args.pgm or None),
        )
        if value is not None
    }
    if output:
        overrides["output"] = output

    fit = {
        key: value
        for key, value in (
            ("input", args.input),
            ("format", args.format),
            ("linear_baseline", args.linear_baseline or None),
            ("average", args.average or None),
        )
        if value is not None
    }
    if fit:
        overrides["fit"] = fit
    if args.alpha is not None:
        overrides["llg"] = {"alpha": args.alpha}
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Polarisation-controlled cavity magnon-polariton simulator",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Reproduce a figure from its recipe
  python cli/experiment_runner.py sweep-field --config recipes/field_sweep_plusz_right.json

  # Resonant cut at matched amplitudes, phase -90 deg, +z bias
  python cli/experiment_runner.py sweep-field --detuning-MHz -20 20 4001 --delta 1 --phi-deg -90

  # Splitting over (delta, phi), bias along -z, first-principles theory
  python cli/experiment_runner.py map-delta-phi --delta-grid 0 1 21 --phi-grid -180 180 73 \\
      --h0-sign -1 --theory perturbation --pgm

  # Lorentzian fits of measured spectra
  python cli/experiment_runner.py fit --input data/cavity.csv --format polar --average
        """,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name in SUBCOMMANDS:
        sub = subparsers.add_parser(name, formatter_class=argparse.RawDescriptionHelpFormatter)
        sub.add_argument("--config", help="Run configuration (JSON or YAML)")
        sub.add_argument("--recipe", help="Recipe name recorded in the output header")
        sub.add_argument("--delta", type=float, help="Port amplitude ratio in [0, 1]")
        sub.add_argument("--phi-deg", type=float, dest="phi_deg", help="Port phase difference [deg]")
        sub.add_argument("--h0-sign", type=int, choices=[1, -1], dest="h0_sign", help="Bias direction")
        sub.add_argument("--probe-power", type=float, dest="probe_power", help="Probe power [W]")
        sub.add_argument("--field-mT", type=float, nargs=3, dest="field_mT", metavar=("START", "STOP", "N"))
        sub.add_argument(
            "--detuning-MHz", type=float, nargs=3, dest="detuning_MHz", metavar=("START", "STOP", "N"),
            help="Probe detuning from omega_c",
        )
        sub.add_argument("--phi-grid", type=float, nargs=3, dest="phi_grid", metavar=("START", "STOP", "N"))
        sub.add_argument("--delta-grid", type=float, nargs=3, dest="delta_grid", metavar=("START", "STOP", "N"))
        sub.add_argument(
            "--frequency-GHz", type=float, nargs=3, dest="frequency_GHz", metavar=("START", "STOP", "N")
        )
        sub.add_argument("--theory", choices=["input-output", "perturbation"])
        sub.add_argument("--overlay", choices=["calibrated", "first-principles"])
        sub.add_argument(
            "--quadrature-order", type=int, dest="quadrature_order", help="Gauss-Legendre order for W_c"
        )
        sub.add_argument("--alpha", type=float, help="Gilbert damping for llg-cone")
        sub.add_argument("--input", help="Spectra file for fit / ingest")
        sub.add_argument("--format", choices=["complex", "polar", "map"])
        sub.add_argument("--linear-baseline", action="store_true", dest="linear_baseline")
        sub.add_argument("--average", action="store_true", help="Append the mean of all fits")
        sub.add_argument("--output", help="Output directory")
        sub.add_argument("--stem", help="Output file stem")
        sub.add_argument("--phase", action=argparse.BooleanOptionalAction, default=None,
                         help="Phase quick-look alongside the magnitude greymap")
        sub.add_argument("--pgm", action="store_true", help="Write PGM greymaps")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run_config = load_run_config(args.config, overrides_from_args(args))
    except ConfigError as e:
        logger.error("run_failed", error=str(e))
        return EXIT_CONFIG
    return run(run_config)


if __name__ == "__main__":
    sys.exit(main())
