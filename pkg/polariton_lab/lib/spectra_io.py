"""
Spectra files: CSV export of sweep maps, greymap quick-looks and ingestion.

Every file starts with a ``#``-commented header of ``key: value`` lines that
echoes the full resolved configuration and the chirality convention. Numbers are
written with 17 significant digits, which round-trips binary64 exactly.

Ingestion formats (column order after the header):
    complex  frequency, re(S11), im(S11)
    polar    frequency, |S11|, arg(S11) [rad]
    map      axis1, axis2 (frequency), |S11|, arg(S11) [rad]
A ``# frequency_unit:`` header line is mandatory.
"""

import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from config.manager import config
from shared.errors import ParseError, UnitError
from shared.logger import get_logger
from shared.models import ComplexSpectrum, SpectralMap

logger = get_logger("SpectraIO")

FILE_VERSION = 1
SIGMA_CONVENTION = "sigma = -h0_sign; |g~|^2 = g^2 (1 + delta^2 + 2 sigma delta sin phi) / (1 + delta^2)"

FREQUENCY_UNITS = {
    "hz": 2.0 * math.pi,
    "khz": 2.0 * math.pi * 1e3,
    "mhz": 2.0 * math.pi * 1e6,
    "ghz": 2.0 * math.pi * 1e9,
    "rad/s": 1.0,
}

COLUMNS = {
    "complex": ["frequency", "re", "im"],
    "polar": ["frequency", "mag", "phase"],
    "map": ["axis1", "axis2", "mag", "phase"],
}

PathLike = Union[str, Path]


def _jsonable(value: Any):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    raise TypeError(f"cannot serialise {type(value).__name__}")


def _fmt(x: float) -> str:
    digits = config.get("output.significant_digits", 17)
    return format(float(x), f".{digits}g")


def _header_lines(
    fmt: str, frequency_unit: str, header: Dict[str, Any], columns: Optional[List[str]] = None
) -> List[str]:
    lines = [
        "# polariton_lab spectra",
        f"# version: {FILE_VERSION}",
        f"# format: {fmt}",
        f"# frequency_unit: {frequency_unit}",
        f"# sigma_convention: {SIGMA_CONVENTION}",
    ]
    for key in sorted(header):
        value = header[key]
        text = value if isinstance(value, str) else json.dumps(value, sort_keys=True, default=_jsonable)
        lines.append(f"# {key}: {text}")
    lines.append("# columns: " + ",".join(columns or COLUMNS[fmt]))
    return lines


def write_spectral_map(path: PathLike, smap: SpectralMap, header: Optional[Dict[str, Any]] = None) -> Path:
    """Row-major CSV (axis1 outer, axis2 inner) of magnitude and phase."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {
        "axis1": smap.axis1_name,
        "axis2": smap.axis2_name,
        "quantity": smap.quantity,
        "parameters": smap.metadata,
    }
    meta.update(header or {})
    mag, phase = smap.magnitude, smap.phase
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write("\n".join(_header_lines("map", "rad/s", meta)) + "\n")
        writer = csv.writer(f, lineterminator="\n")
        for i, a1 in enumerate(smap.axis1):
            for j, a2 in enumerate(smap.axis2):
                writer.writerow([_fmt(a1), _fmt(a2), _fmt(mag[i, j]), _fmt(phase[i, j])])
    logger.info("file_written", file=str(path), points=mag.size)
    return path


def write_spectrum(
    path: PathLike,
    spectrum: ComplexSpectrum,
    fmt: str = "polar",
    frequency_unit: str = "rad/s",
    header: Optional[Dict[str, Any]] = None,
) -> Path:
    if fmt not in ("complex", "polar"):
        raise ValueError("single spectra are written as 'complex' or 'polar'")
    scale = _unit_scale(frequency_unit)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {"parameters": spectrum.metadata}
    meta.update(header or {})
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write("\n".join(_header_lines(fmt, frequency_unit, meta)) + "\n")
        writer = csv.writer(f, lineterminator="\n")
        for w, s in zip(spectrum.freq_grid, spectrum.s11):
            a, b = (s.real, s.imag) if fmt == "complex" else (abs(s), np.angle(s))
            writer.writerow([_fmt(w / scale), _fmt(a), _fmt(b)])
    logger.info("file_written", file=str(path), points=len(spectrum.freq_grid))
    return path


def write_pgm(path: PathLike, smap: SpectralMap, quantity: str = "magnitude") -> Path:
    """Plain (P2) portable greymap: one row per axis1 value, scaled to the full grey range."""
    data = smap.magnitude if quantity == "magnitude" else smap.phase
    max_grey = config.get("output.pgm_max_grey", 255)
    lo, hi = float(np.min(data)), float(np.max(data))
    if hi > lo:
        grey = np.rint((data - lo) / (hi - lo) * max_grey).astype(int)
    else:
        grey = np.zeros(data.shape, dtype=int)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows, cols = grey.shape
    with open(path, "w", encoding="ascii") as f:
        f.write("P2\n")
        f.write(f"# {smap.quantity} {quantity} over {smap.axis1_name} x {smap.axis2_name}\n")
        f.write(f"{cols} {rows}\n{max_grey}\n")
        for row in grey:
            f.write(" ".join(str(v) for v in row) + "\n")
    logger.info("file_written", file=str(path), points=grey.size)
    return path


def _unit_scale(unit: str) -> float:
    key = unit.strip().lower()
    if key not in FREQUENCY_UNITS:
        raise UnitError(f"unknown frequency unit '{unit}' (expected one of Hz, kHz, MHz, GHz, rad/s)")
    return FREQUENCY_UNITS[key]


def _read_rows(path: Path, n_cols: int) -> Tuple[Dict[str, str], np.ndarray]:
    header: Dict[str, str] = {}
    rows: List[List[float]] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, sep, value = line[1:].partition(":")
                if sep:
                    header[key.strip().lower()] = value.strip()
                continue
            cells = next(csv.reader([line]))
            if not rows and cells and all(c.strip().lower() in sum(COLUMNS.values(), []) for c in cells):
                continue
            if len(cells) != n_cols:
                raise ParseError(f"expected {n_cols} columns, found {len(cells)}", line=lineno, path=str(path))
            try:
                values = [float(c) for c in cells]
            except ValueError:
                raise ParseError(f"non-numeric value in row: {line!r}", line=lineno, path=str(path))
            if not all(math.isfinite(v) for v in values):
                raise ParseError(f"non-finite value in row: {line!r}", line=lineno, path=str(path))
            rows.append(values)
    if not rows:
        raise ParseError("no data rows", path=str(path))
    return header, np.array(rows)


def read_map_columns(path: PathLike) -> Dict[str, np.ndarray]:
    """Raw numeric columns of an exported map, exactly as written."""
    _, data = _read_rows(Path(path), 4)
    return {name: data[:, k] for k, name in enumerate(COLUMNS["map"])}


def ingest_spectra(path: PathLike, fmt: str = "polar") -> List[ComplexSpectrum]:
    """Frequency-sorted complex spectra [rad/s] from a CSV export."""
    if fmt not in COLUMNS:
        raise ValueError(f"unknown spectra format '{fmt}'")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"spectra file not found: {path}")
    header, data = _read_rows(path, len(COLUMNS[fmt]))
    if "frequency_unit" not in header:
        raise UnitError(f"{path}: header does not declare '# frequency_unit:'")
    scale = _unit_scale(header["frequency_unit"])
    meta: Dict[str, Any] = {"source": str(path), "header": header}

    if fmt == "complex":
        groups = [(None, data[:, 0], data[:, 1] + 1j * data[:, 2])]
    elif fmt == "polar":
        groups = [(None, data[:, 0], data[:, 1] * np.exp(1j * data[:, 2]))]
    else:
        groups = []
        keys, first_index = np.unique(data[:, 0], return_index=True)
        for key in keys[np.argsort(first_index)]:
            sel = data[:, 0] == key
            groups.append((float(key), data[sel, 1], data[sel, 2] * np.exp(1j * data[sel, 3])))

    spectra = []
    for axis1, freq, values in groups:
        order = np.argsort(freq, kind="stable")
        item_meta = dict(meta)
        if axis1 is not None:
            item_meta["axis1"] = axis1
        spectra.append(ComplexSpectrum(freq_grid=freq[order] * scale, s11=values[order], metadata=item_meta))
    logger.info("spectra_ingested", file=str(path), points=len(spectra))
    return spectra


def write_table(
    path: PathLike,
    columns: List[str],
    rows: List[List[Union[float, str]]],
    header: Optional[Dict[str, Any]] = None,
    frequency_unit: str = "rad/s",
) -> Path:
    """Generic commented-header CSV for derived results (cones, fits, overlays)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write("\n".join(_header_lines("table", frequency_unit, header or {}, columns)) + "\n")
        writer = csv.writer(f, lineterminator="\n")
        for row in rows:
            writer.writerow([v if isinstance(v, str) else _fmt(v) for v in row])
    logger.info("file_written", file=str(path), points=len(rows))
    return path
