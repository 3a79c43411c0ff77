"""Dip finding and Rabi-splitting extraction from reflection spectra."""

import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.signal import find_peaks

from config.manager import config
from lib import quantum_io
from shared.errors import UnresolvedSplittingError
from shared.logger import get_logger
from shared.models import ComplexSpectrum, DriveState, SystemParams

from .fitting import magnitude_series

logger = get_logger("SpectraAnalysis")


def find_dips(
    spectrum: Union[ComplexSpectrum, Tuple[Sequence[float], Sequence[float]]],
    prominence_floor: Optional[float] = None,
) -> List[float]:
    """Frequencies of |S11| minima whose prominence exceeds a fraction of the dynamic range.

    Sorted ascending; a flat-bottomed minimum reports its middle sample.
    """
    floor = config.get("numerics.dip_prominence_floor", 0.05) if prominence_floor is None else prominence_floor
    x, y = magnitude_series(spectrum)
    if not np.all(np.isfinite(y)):
        raise ValueError("spectrum must be finite")
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    span = float(np.ptp(y)) if y.size else 0.0
    if span == 0.0:
        return []
    peaks, _ = find_peaks(-y, prominence=floor * span)
    return [float(x[i]) for i in peaks]


def _deepest_pair(spectrum: ComplexSpectrum, dips: List[float]) -> Tuple[float, float]:
    x, y = spectrum.freq_grid, spectrum.magnitude
    depth = {w: float(y[int(np.searchsorted(x, w))]) for w in dips}
    ranked = sorted(dips, key=lambda w: (depth[w], w))
    first, second = sorted(ranked[:2])
    return first, second


def extract_splitting(
    params: SystemParams,
    drive: DriveState,
    resolution: Optional[float] = None,
    prominence_floor: Optional[float] = None,
) -> float:
    """Distance between the two deepest dips of the resonant spectrum [rad/s].

    The bias is tuned so omega_0 = omega_c. ``resolution`` is the frequency step
    [rad/s] (1 kHz by default).
    """
    cav = params.cavity
    magnet = params.magnet
    drive = quantum_io.resonant_drive(params, drive)
    g_abs = quantum_io.effective_coupling(params.coupling, drive).magnitude
    if 2.0 * g_abs <= cav.kappa + magnet.eta_kittel:
        raise UnresolvedSplittingError(
            f"2|g~| = {2 * g_abs / (2e6 * math.pi):.3f} MHz does not exceed kappa + eta"
        )

    step = resolution or config.get("numerics.splitting_resolution_kHz", 1.0) * 2e3 * math.pi
    half_span = 2.0 * g_abs + config.get("numerics.splitting_span_kappas", 10.0) * cav.kappa
    n = int(math.ceil(half_span / step))
    freqs = cav.omega_c + step * np.arange(-n, n + 1)
    spectrum = ComplexSpectrum(
        freq_grid=freqs,
        s11=quantum_io.resonant_spectrum_values(params, drive, freqs),
        metadata={"drive": drive.model_dump()},
    )

    dips = find_dips(spectrum, prominence_floor)
    logger.debug("dips_found", points=len(dips))
    if len(dips) < 2:
        raise UnresolvedSplittingError(f"found {len(dips)} dip(s); splitting unresolved")
    low, high = _deepest_pair(spectrum, dips)
    splitting = high - low
    logger.debug(
        "splitting_extracted",
        delta=drive.delta,
        phi_deg=round(math.degrees(drive.phi), 3),
        h0_sign=drive.h0_sign,
        splitting_mhz=round(splitting / (2e6 * math.pi), 4),
    )
    return splitting
