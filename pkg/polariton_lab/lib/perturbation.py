"""Cavity perturbation theory for the magnon-photon hybrid.

The hybrid frequencies follow from the energy ratio W_p/W_c alone; damping is
neglected. The closed-form branches solve the characteristic equation linearised
about omega_0 (omega_0 omega_m / (omega_0^2 - omega^2) ~ omega_m / (2 (omega_0 - omega))),
which ``detuning_residual`` evaluates by default.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.optimize import bisect

from config.manager import config
from lib import cavity_fields
from shared.errors import PoleError, UnsupportedModePairError
from shared.logger import get_logger
from shared.models import CavityParams, DriveState, MagnetParams

logger = get_logger("Perturbation")

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class HybridBranches:
    omega_a: ArrayLike
    omega_b: ArrayLike

    @property
    def gap(self) -> ArrayLike:
        return self.omega_a - self.omega_b


def detuning_residual(
    omega: float,
    omega_c: float,
    omega0: float,
    magnet: MagnetParams,
    wp_over_wc: float,
    exact: bool = False,
) -> float:
    """(omega - omega_c)/omega_c + coupling term; zero at a hybrid eigenfrequency.

    ``exact`` keeps the full omega_0 omega_m / (omega_0^2 - omega^2) susceptibility
    factor instead of its near-resonance form.
    """
    if omega == omega0 or (exact and omega == -omega0):
        raise PoleError(f"residual has a pole at omega = {omega0:g} rad/s")
    if exact:
        coupling_term = omega0 * magnet.omega_m / (omega0 ** 2 - omega ** 2)
    else:
        coupling_term = magnet.omega_m / (2.0 * (omega0 - omega))
    return (omega - omega_c) / omega_c + coupling_term * wp_over_wc


def hybrid_eigenfrequencies(
    omega_c: ArrayLike, omega0: ArrayLike, magnet: MagnetParams, wp_over_wc: float
) -> HybridBranches:
    if wp_over_wc < 0:
        raise ValueError("wp_over_wc must be non-negative")
    mean = 0.5 * (omega_c + omega0)
    half_gap = 0.5 * np.sqrt((omega_c - omega0) ** 2 + 2.0 * omega_c * magnet.omega_m * wp_over_wc)
    return HybridBranches(omega_a=mean + half_gap, omega_b=mean - half_gap)


def rabi_splitting_pert(omega_c: float, magnet: MagnetParams, wp_over_wc: float) -> float:
    if wp_over_wc < 0:
        raise ValueError("wp_over_wc must be non-negative")
    return math.sqrt(2.0 * omega_c * magnet.omega_m * wp_over_wc)


def residual_roots(
    omega_c: float,
    omega0: float,
    magnet: MagnetParams,
    wp_over_wc: float,
    margin: Optional[float] = None,
    exact: bool = False,
) -> HybridBranches:
    """Both roots of the residual by bisection on either side of the pole.

    Brackets are (omega_b - margin, pole) and (pole, omega_a + margin) around the
    closed-form branches; ``margin`` defaults to the closed-form gap.
    """
    closed = hybrid_eigenfrequencies(omega_c, omega0, magnet, wp_over_wc)
    if wp_over_wc == 0:
        return closed
    margin = float(closed.gap) if margin is None else margin
    margin = max(margin, 1e-6 * omega0)
    xtol_rel = config.get("numerics.root_xtol_rel", 1e-12)

    def f(w: float) -> float:
        return detuning_residual(w, omega_c, omega0, magnet, wp_over_wc, exact=exact)

    eps_low = min(1e-9 * omega0, 0.5 * (omega0 - float(closed.omega_b)))
    eps_high = min(1e-9 * omega0, 0.5 * (float(closed.omega_a) - omega0))
    low = bisect(f, float(closed.omega_b) - margin, omega0 - eps_low, xtol=1e-300, rtol=xtol_rel)
    high = bisect(f, omega0 + eps_high, float(closed.omega_a) + margin, xtol=1e-300, rtol=xtol_rel)
    return HybridBranches(omega_a=high, omega_b=low)


def energy_ratio(
    cavity: CavityParams,
    magnet: MagnetParams,
    drive: DriveState,
    sample_position: Optional[Tuple[float, float]] = None,
    uniform_field: bool = True,
    quadrature_order: Optional[int] = None,
) -> float:
    """First-principles W_p/W_c from the cavity field profiles.

    An explicit ``quadrature_order`` integrates W_c numerically at that order; otherwise
    the closed form is used where it applies.
    """
    wp = cavity_fields.sample_energy(
        cavity, drive, magnet, sample_position, uniform_field=uniform_field
    )
    if quadrature_order is not None:
        return wp / cavity_fields.cavity_energy_numeric(cavity, drive, quadrature_order)
    try:
        wc = cavity_fields.cavity_energy_analytic(cavity, drive)
    except UnsupportedModePairError:
        wc = cavity_fields.cavity_energy_numeric(cavity, drive)
    return wp / wc


def calibrated_energy_ratio(g_tilde_abs: float, omega_c: float, magnet: MagnetParams) -> float:
    """W_p/W_c for which perturbation theory reproduces a splitting of 2|g~|."""
    return 2.0 * g_tilde_abs ** 2 / (omega_c * magnet.omega_m)
