"""Kittel relation and the reference parameter set."""

import math
from typing import Tuple

from config.manager import config
from shared.models import CavityParams, CouplingParams, DriveState, MagnetParams, SystemParams

TWO_PI = 2.0 * math.pi
MHZ = TWO_PI * 1e6
GHZ = TWO_PI * 1e9


def kittel_frequency(magnet: MagnetParams, drive: DriveState) -> float:
    """omega_0 = 2*pi*gamma*mu0*H0 [rad/s]; the bias sign does not enter."""
    return magnet.gamma_ang * drive.mu0_H0


def field_for_resonance(magnet: MagnetParams, omega_target: float) -> float:
    """Bias induction [T] whose Kittel frequency is ``omega_target``."""
    if omega_target < 0:
        raise ValueError("omega_target must be non-negative")
    return omega_target / magnet.gamma_ang


def reference_preset() -> Tuple[SystemParams, DriveState]:
    """Reference YIG-sphere parameter set, biased on resonance with the cavity.

    Gilbert damping, unless pinned in settings, is eta_kittel / omega_0 at the
    reference field so time- and frequency-domain decay rates agree.
    """
    p = config.settings.preset
    eta_kittel = p.eta_kittel_MHz * MHZ
    gamma_ang = TWO_PI * p.gamma_GHz_per_T * 1e9
    alpha = p.alpha
    if alpha is None:
        alpha = eta_kittel / (gamma_ang * p.alpha_reference_field_T)

    magnet = MagnetParams(
        mu0_Ms=p.mu0_Ms_T,
        gamma=p.gamma_GHz_per_T,
        rho=p.rho_per_m3,
        sample_diameter=p.sample_diameter_m,
        alpha=alpha,
        eta_kittel=eta_kittel,
    )
    modes = tuple(tuple(m) for m in p.modes)
    cavity = CavityParams(
        a=p.cavity_a_m,
        b=p.cavity_b_m,
        c=p.cavity_c_m,
        omega_c=p.omega_c_GHz * GHZ,
        kappa=p.kappa_MHz * MHZ,
        modes=modes,
    )
    coupling = CouplingParams(g=p.g_MHz * MHZ, eta_overlap=p.eta_overlap)
    params = SystemParams(magnet=magnet, cavity=cavity, coupling=coupling)

    drive = DriveState(
        mu0_H0=field_for_resonance(magnet, cavity.omega_c),
        probe_power=p.probe_power_W,
    )
    return params, drive
