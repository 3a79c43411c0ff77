"""Input-output model of the cavity magnon-polariton.

Reflection, hybrid eigenvalues and the sweep maps all use the effective coupling
g~ = g (1 - i delta e^{i sigma phi}) / sqrt(1 + delta^2), sigma = -h0_sign, so that
for a +z bias the coupling is enhanced by sqrt(2) at phi = -90 deg and vanishes at
phi = +90 deg. Reversing the bias mirrors every map in phi.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import constants

from lib import perturbation
from lib.params import kittel_frequency
from shared.errors import GridError
from shared.logger import get_logger
from shared.models import (
    CavityParams,
    CouplingParams,
    DriveState,
    MagnetParams,
    SpectralMap,
    SystemParams,
)

logger = get_logger("QuantumIO")

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class EffectiveCoupling:
    g_tilde: complex

    @property
    def magnitude(self) -> float:
        return abs(self.g_tilde)


def effective_coupling(coupling: CouplingParams, drive: DriveState) -> EffectiveCoupling:
    d = drive.delta
    g_tilde = coupling.g * (1.0 - 1j * d * np.exp(1j * drive.sigma * drive.phi)) / math.sqrt(1.0 + d * d)
    return EffectiveCoupling(g_tilde=complex(g_tilde))


def bare_g_first_principles(
    magnet: MagnetParams, cavity: CavityParams, eta_overlap: float
) -> float:
    """g = gamma_ang * eta_overlap * sqrt(5 N mu0 hbar omega_c / (8 v)).

    SI form of the Gaussian-unit vacuum-field expression (4 pi -> mu0 and the
    TE_120/TE_210 energy normalisation 5 pi^2 / 4 folded in).
    """
    if eta_overlap < 0:
        raise ValueError("eta_overlap must be non-negative")
    n_spins = magnet.spin_count
    vacuum = math.sqrt(5.0 * n_spins * constants.mu_0 * constants.hbar * cavity.omega_c / (8.0 * cavity.volume))
    return magnet.gamma_ang * eta_overlap * vacuum


def s11(
    omega: ArrayLike,
    omega_c: ArrayLike,
    omega0: ArrayLike,
    kappa: float,
    eta_kittel: float,
    g_tilde: complex,
):
    """Complex reflection; |S11| is the measured spectrum and arg(S11) its phase."""
    magnon = omega0 - omega - 1j * eta_kittel
    g2 = abs(g_tilde) ** 2
    return 1j * kappa * magnon / ((omega - omega_c + 1j * kappa) * magnon + g2) - 1.0


def probe_strength(probe_power: float, kappa: float, omega_probe: float) -> float:
    """epsilon_c = sqrt(2 kappa D_c / (hbar omega))."""
    if probe_power < 0 or kappa <= 0 or omega_probe <= 0:
        raise ValueError("probe_power must be non-negative, kappa and omega_probe positive")
    return math.sqrt(2.0 * kappa * probe_power / (constants.hbar * omega_probe))


def steady_state_amplitudes(
    omega: ArrayLike,
    omega_c: float,
    omega0: float,
    kappa: float,
    eta_kittel: float,
    g_tilde: complex,
    epsilon_c: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """Long-time photon and magnon amplitudes (a, b) in the frame of the probe."""
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    m = np.empty(w.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = omega_c - w - 1j * kappa
    m[..., 0, 1] = g_tilde
    m[..., 1, 0] = np.conj(g_tilde)
    m[..., 1, 1] = omega0 - w - 1j * eta_kittel
    rhs = np.zeros(w.shape + (2, 1), dtype=complex)
    rhs[..., 0, 0] = -1j * epsilon_c
    sol = np.linalg.solve(m, rhs)[..., 0]
    a, b = sol[..., 0], sol[..., 1]
    if np.ndim(omega) == 0:
        return a[0], b[0]
    return a, b


def s11_from_steady_state(
    omega: ArrayLike,
    omega_c: float,
    omega0: float,
    kappa: float,
    eta_kittel: float,
    g_tilde: complex,
    epsilon_c: float = 1.0,
):
    """S11 = a_out / a_in with a_in = epsilon_c / sqrt(kappa), a_out = sqrt(kappa) a - a_in."""
    if epsilon_c == 0:
        raise ValueError("epsilon_c must be non-zero")
    a, _ = steady_state_amplitudes(omega, omega_c, omega0, kappa, eta_kittel, g_tilde, epsilon_c)
    return kappa * a / epsilon_c - 1.0


def hybrid_eigenvalues_io(
    omega_c: ArrayLike,
    omega0: ArrayLike,
    kappa: float,
    eta_kittel: float,
    g_tilde: complex,
) -> np.ndarray:
    """Eigenvalues of [[omega_c - i kappa, g~], [g~*, omega_0 - i eta]], real part descending.

    Returns shape (..., 2) for array inputs and (2,) for scalars.
    """
    A = np.asarray(omega_c, dtype=complex) - 1j * kappa
    B = np.asarray(omega0, dtype=complex) - 1j * eta_kittel
    A, B = np.broadcast_arrays(A, B)
    m = np.empty(A.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = A
    m[..., 0, 1] = g_tilde
    m[..., 1, 0] = np.conj(g_tilde)
    m[..., 1, 1] = B
    eig = np.linalg.eigvals(m)
    order = np.argsort(-eig.real, axis=-1, kind="stable")
    return np.take_along_axis(eig, order, axis=-1)


def hybrid_mode_composition(omega_c: ArrayLike, omega0: ArrayLike, g_tilde: complex) -> np.ndarray:
    """Photon fraction of the (upper, lower) undamped hybrid branch.

    Magnon fractions are one minus these. At zero detuning both are 1/2.
    """
    detuning = np.asarray(omega_c, dtype=float) - np.asarray(omega0, dtype=float)
    root = np.sqrt(detuning ** 2 + 4.0 * abs(g_tilde) ** 2)
    with np.errstate(invalid="ignore", divide="ignore"):
        upper = np.where(root > 0, 0.5 * (1.0 + detuning / np.where(root > 0, root, 1.0)), 0.5)
    return np.stack([upper, 1.0 - upper], axis=-1)


def validate_grid(grid: Sequence[float], name: str) -> np.ndarray:
    """Non-empty, finite and strictly monotone (either direction)."""
    values = np.asarray(grid, dtype=float).ravel()
    if values.size == 0:
        raise GridError(f"{name} grid is empty")
    if not np.all(np.isfinite(values)):
        raise GridError(f"{name} grid has non-finite values")
    if values.size > 1:
        steps = np.diff(values)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise GridError(f"{name} grid is not strictly monotone")
    return values


def _metadata(params: SystemParams, drive: DriveState, **extra) -> dict:
    meta = {
        "magnet": params.magnet.model_dump(),
        "cavity": params.cavity.model_dump(),
        "coupling": params.coupling.model_dump(),
        "drive": drive.model_dump(),
        "sigma": drive.sigma,
    }
    meta.update(extra)
    return meta


def field_sweep_map(
    params: SystemParams,
    drive: DriveState,
    field_grid: Sequence[float],
    freq_grid: Sequence[float],
) -> SpectralMap:
    """S11 over bias induction [T] x probe frequency [rad/s]."""
    fields = validate_grid(field_grid, "field")
    freqs = validate_grid(freq_grid, "frequency")
    if np.any(fields < 0):
        raise GridError("field grid must be non-negative; direction is carried by h0_sign")
    cav = params.cavity
    g_tilde = effective_coupling(params.coupling, drive).g_tilde
    omega0 = params.magnet.gamma_ang * fields
    values = s11(freqs[None, :], cav.omega_c, omega0[:, None], cav.kappa, params.magnet.eta_kittel, g_tilde)
    logger.debug("field_sweep_built", points=values.size, g_tilde_mhz=abs(g_tilde) / (2e6 * math.pi))
    return SpectralMap(
        axis1_name="mu0_H0",
        axis1=fields,
        axis2_name="omega",
        axis2=freqs,
        values=values,
        quantity="s11",
        metadata=_metadata(params, drive, g_tilde_abs=abs(g_tilde)),
    )


def phase_sweep_map(
    params: SystemParams,
    delta: float,
    phi_grid: Sequence[float],
    freq_grid: Sequence[float],
    h0_sign: int = 1,
) -> SpectralMap:
    """S11 over port phase [rad] x probe frequency with the magnon tuned to omega_c."""
    if not (math.isfinite(delta) and 0.0 <= delta <= 1.0):
        raise GridError(f"port amplitude ratio delta must lie in [0, 1], got {delta!r}")
    phis = validate_grid(phi_grid, "phi")
    freqs = validate_grid(freq_grid, "frequency")
    cav = params.cavity
    rows = []
    for phi in phis:
        drive = DriveState(delta=delta, phi=float(phi), h0_sign=h0_sign)
        g_tilde = effective_coupling(params.coupling, drive).g_tilde
        rows.append(s11(freqs, cav.omega_c, cav.omega_c, cav.kappa, params.magnet.eta_kittel, g_tilde))
    base = DriveState(delta=delta, h0_sign=h0_sign)
    return SpectralMap(
        axis1_name="phi",
        axis1=phis,
        axis2_name="omega",
        axis2=freqs,
        values=np.array(rows),
        quantity="s11",
        metadata=_metadata(params, base),
    )


def splitting_map(
    params: SystemParams,
    delta_grid: Sequence[float],
    phi_grid: Sequence[float],
    h0_sign: int = 1,
    theory: str = "input-output",
    quadrature_order: Optional[int] = None,
) -> SpectralMap:
    """Delta-omega [rad/s] over (delta, phi).

    ``input-output`` gives 2|g~|; ``perturbation`` evaluates the first-principles
    energy-ratio splitting at omega_0 = omega_c, with W_c integrated at
    ``quadrature_order`` when one is given.
    """
    deltas = validate_grid(delta_grid, "delta")
    phis = validate_grid(phi_grid, "phi")
    if np.any(deltas < 0) or np.any(deltas > 1):
        raise GridError("delta grid must lie within [0, 1]")
    if theory not in ("input-output", "perturbation"):
        raise ValueError(f"unknown theory '{theory}'")

    values = np.empty((deltas.size, phis.size), dtype=float)
    for i, d in enumerate(deltas):
        for j, phi in enumerate(phis):
            drive = DriveState(delta=float(d), phi=float(phi), h0_sign=h0_sign)
            if theory == "input-output":
                values[i, j] = 2.0 * effective_coupling(params.coupling, drive).magnitude
            else:
                ratio = perturbation.energy_ratio(
                    params.cavity, params.magnet, drive, quadrature_order=quadrature_order
                )
                values[i, j] = perturbation.rabi_splitting_pert(params.cavity.omega_c, params.magnet, ratio)

    base = DriveState(h0_sign=h0_sign)
    return SpectralMap(
        axis1_name="delta",
        axis1=deltas,
        axis2_name="phi",
        axis2=phis,
        values=values,
        quantity="splitting",
        metadata=_metadata(params, base, theory=theory),
    )


def branch_overlay(
    params: SystemParams,
    drive: DriveState,
    field_grid: Sequence[float],
    mode: str = "calibrated",
    quadrature_order: Optional[int] = None,
) -> perturbation.HybridBranches:
    """Perturbation-theory branches along a field sweep.

    ``calibrated`` picks the energy ratio that reproduces 2|g~|; ``first-principles``
    takes it from the cavity field profiles.
    """
    fields = validate_grid(field_grid, "field")
    cav = params.cavity
    if mode == "calibrated":
        g_abs = effective_coupling(params.coupling, drive).magnitude
        ratio = perturbation.calibrated_energy_ratio(g_abs, cav.omega_c, params.magnet)
    elif mode == "first-principles":
        ratio = perturbation.energy_ratio(cav, params.magnet, drive, quadrature_order=quadrature_order)
    else:
        raise ValueError(f"unknown overlay mode '{mode}'")
    omega0 = params.magnet.gamma_ang * fields
    return perturbation.hybrid_eigenfrequencies(cav.omega_c, omega0, params.magnet, ratio)


def resonant_drive(params: SystemParams, drive: DriveState) -> DriveState:
    """Copy of ``drive`` with the bias tuned so omega_0 = omega_c."""
    mu0_H0 = params.cavity.omega_c / params.magnet.gamma_ang
    return drive.replace(mu0_H0=mu0_H0)


def resonant_spectrum_values(
    params: SystemParams, drive: DriveState, freq_grid: np.ndarray
) -> np.ndarray:
    cav = params.cavity
    omega0 = kittel_frequency(params.magnet, drive)
    g_tilde = effective_coupling(params.coupling, drive).g_tilde
    return s11(freq_grid, cav.omega_c, omega0, cav.kappa, params.magnet.eta_kittel, g_tilde)
