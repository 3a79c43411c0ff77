"""
Lorentzian line fitting and linewidth conversions.

The model is a Lorentzian dip (or peak, for negative depth) on an optional
linear baseline:

    y(w) = baseline + slope * (w - center) - depth * hwhm^2 / ((w - center)^2 + hwhm^2)

Fits run in coordinates scaled by the initial width guess with an analytic
Jacobian. A fit that fails to converge is retried from a widened initial guess.
"""

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import constants
from scipy.optimize import least_squares
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from config.manager import config
from shared.errors import NoDipError, NonConvergenceError
from shared.logger import get_logger
from shared.models import ComplexSpectrum, MagnetParams

logger = get_logger("LorentzianFit")

MIN_SAMPLES = 8


@dataclass(frozen=True)
class LorentzianFit:
    center: float
    hwhm: float
    depth: float
    baseline: float
    slope: float = 0.0
    residual_norm: float = 0.0

    def evaluate(self, omega) -> np.ndarray:
        u = np.asarray(omega, dtype=float) - self.center
        line = self.depth * self.hwhm ** 2 / (u ** 2 + self.hwhm ** 2)
        return self.baseline + self.slope * u - line


def magnitude_series(
    spectrum: Union[ComplexSpectrum, Tuple[Sequence[float], Sequence[float]]]
) -> Tuple[np.ndarray, np.ndarray]:
    """(frequency, |S11|) from a spectrum or a plain (frequency, magnitude) pair."""
    if isinstance(spectrum, ComplexSpectrum):
        return np.asarray(spectrum.freq_grid, dtype=float), spectrum.magnitude
    freq, values = spectrum
    return np.asarray(freq, dtype=float), np.abs(np.asarray(values))


def _initial_guess(x: np.ndarray, y: np.ndarray) -> LorentzianFit:
    if np.ptp(y) == 0:
        raise NoDipError("spectrum is flat")
    edge = max(1, len(y) // 10)
    baseline = float(np.median(np.concatenate([y[:edge], y[-edge:]])))
    lo, hi = int(np.argmin(y)), int(np.argmax(y))
    is_dip = (baseline - y[lo]) >= (y[hi] - baseline)
    idx = lo if is_dip else hi
    if idx in (0, len(y) - 1):
        raise NoDipError("extremum sits on the edge of the frequency range")
    depth = baseline - float(y[idx])

    half = baseline - depth / 2.0
    beyond = (y > half) if is_dip else (y < half)
    left = np.nonzero(beyond[:idx])[0]
    right = np.nonzero(beyond[idx:])[0]
    if left.size and right.size:
        hwhm = 0.5 * (x[idx + right[0]] - x[left[-1]])
    else:
        hwhm = (x[-1] - x[0]) / 10.0
    return LorentzianFit(center=float(x[idx]), hwhm=float(abs(hwhm)), depth=depth, baseline=baseline)


def _solve(x, y, guess: LorentzianFit, linear_baseline: bool, max_nfev: int) -> LorentzianFit:
    c0, s = guess.center, guess.hwhm
    xs = (x - c0) / s

    def unpack(p):
        slope = p[4] if linear_baseline else 0.0
        return p[0], p[1], p[2], p[3], slope

    def residuals(p):
        xc, w, depth, base, slope = unpack(p)
        u = xs - xc
        return base + slope * xs - depth * w * w / (u * u + w * w) - y

    def jacobian(p):
        xc, w, depth, _, _ = unpack(p)
        u = xs - xc
        den = u * u + w * w
        cols = [
            -depth * 2.0 * w * w * u / den ** 2,
            -depth * 2.0 * w * u * u / den ** 2,
            -(w * w) / den,
            np.ones_like(xs),
        ]
        if linear_baseline:
            cols.append(xs)
        return np.column_stack(cols)

    p0 = [0.0, 1.0, guess.depth, guess.baseline]
    if linear_baseline:
        p0.append(0.0)
    result = least_squares(
        residuals,
        np.array(p0),
        jac=jacobian,
        method="lm",
        ftol=1e-14,
        xtol=1e-14,
        gtol=1e-14,
        max_nfev=max_nfev,
    )
    if not result.success or not np.all(np.isfinite(result.x)):
        raise NonConvergenceError(f"least squares stopped: {result.message}")
    xc, w, depth, base, slope = unpack(result.x)
    if w == 0:
        raise NonConvergenceError("fitted width collapsed to zero")
    return LorentzianFit(
        center=float(c0 + xc * s),
        hwhm=float(abs(w) * s),
        depth=float(depth),
        baseline=float(base + slope * xc),
        slope=float(slope / s),
        residual_norm=float(np.linalg.norm(result.fun)),
    )


def fit_lorentzian(
    spectrum: Union[ComplexSpectrum, Tuple[Sequence[float], Sequence[float]]],
    initial_guess: Optional[LorentzianFit] = None,
    linear_baseline: bool = False,
) -> LorentzianFit:
    """Least-squares Lorentzian through |S11| (or any magnitude series)."""
    x, y = magnitude_series(spectrum)
    if x.size < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {x.size}")
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    guess = initial_guess or _initial_guess(x, y)

    attempts = config.get("numerics.fit_attempts", 3)
    jitter = config.get("numerics.fit_jitter", 0.25)
    max_nfev = config.get("numerics.fit_max_nfev", 2000)

    for attempt in Retrying(
        stop=stop_after_attempt(attempts),
        retry=retry_if_exception_type(NonConvergenceError),
        reraise=True,
    ):
        with attempt:
            n = attempt.retry_state.attempt_number
            trial = guess
            if n > 1:
                logger.warning("fit_retry", attempt=n, hwhm_mhz=guess.hwhm / (2e6 * math.pi))
                trial = LorentzianFit(
                    center=guess.center,
                    hwhm=guess.hwhm * (1.0 + jitter * (n - 1)),
                    depth=guess.depth,
                    baseline=guess.baseline,
                )
            fit = _solve(x, y, trial, linear_baseline, max_nfev)
    logger.debug("fit_converged", hwhm_mhz=fit.hwhm / (2e6 * math.pi), residual=fit.residual_norm)
    return fit


def linewidth_to_eta(delta_H: float, magnet: MagnetParams) -> float:
    """eta = gamma * delta_H, angular [rad/s]; delta_H is an induction linewidth [T]."""
    if delta_H < 0:
        raise ValueError("delta_H must be non-negative")
    return magnet.gamma_ang * delta_H


def photon_number(power_in: float, omega_c: float, Q_i: float, Q_c: float) -> float:
    """<n> = 4 P_in / (hbar omega_c^2) * Q_i^2 Q_c / (Q_i + Q_c)^2."""
    if power_in < 0 or omega_c <= 0 or Q_i <= 0 or Q_c < 0:
        raise ValueError("photon_number needs non-negative power and Q_c, positive omega_c and Q_i")
    return 4.0 * power_in / (constants.hbar * omega_c ** 2) * Q_i ** 2 * Q_c / (Q_i + Q_c) ** 2


def port_photon_balance(power_in: float, omega_c: float, Q_i: float, Q_c1: float, Q_c2: float) -> float:
    """<n_1>/<n_2> for two ports fed with the same power."""
    return photon_number(power_in, omega_c, Q_i, Q_c1) / photon_number(power_in, omega_c, Q_i, Q_c2)


def average_cavity_fits(fits: Iterable[LorentzianFit]) -> LorentzianFit:
    """Mean centre and linewidth over cavity fits taken at different phase settings."""
    fits = list(fits)
    if not fits:
        raise ValueError("no fits to average")
    return LorentzianFit(
        center=float(np.mean([f.center for f in fits])),
        hwhm=float(np.mean([f.hwhm for f in fits])),
        depth=float(np.mean([f.depth for f in fits])),
        baseline=float(np.mean([f.baseline for f in fits])),
        slope=float(np.mean([f.slope for f in fits])),
        residual_norm=float(np.sqrt(np.mean([f.residual_norm ** 2 for f in fits]))),
    )
