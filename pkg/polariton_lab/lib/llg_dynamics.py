"""Macrospin Landau-Lifshitz-Gilbert dynamics under a two-port drive.

The Gilbert form is integrated in its explicit Landau-Lifshitz equivalent

    dm/dt = -gamma/(1 + alpha^2) [m x B + alpha m x (m x B)]

with B = h0_sign mu0 H0 z + mu0 h (cos wt, delta cos(wt + phi), 0), i.e. the real
part of the complex drive (x + y delta e^{i phi}) h e^{i w t}. Classic RK4 with
the unit vector renormalised after every step.
"""

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import constants

from config.manager import config
from lib.params import kittel_frequency
from shared.errors import NotSettledError, ParameterError, StepTooLargeError
from shared.logger import get_logger
from shared.models import DriveState, MagnetParams

logger = get_logger("LLGDynamics")


@dataclass(frozen=True)
class PrecessionTrajectory:
    times: np.ndarray  # [s]
    m_unit: np.ndarray  # (N, 3)
    drive_record: np.ndarray  # (N, 2) applied h_x, h_y [A/m]
    omega_drive: float
    h0_sign: int


@dataclass(frozen=True)
class PrecessionCone:
    cone_angle: float
    handedness: Optional[str]  # "with-field", "against-field" or None below the floor
    ellipticity: float


def _require_drive_frequency(omega_drive: float) -> None:
    if not (math.isfinite(omega_drive) and omega_drive > 0):
        raise ParameterError(f"drive frequency must be positive and finite, got {omega_drive!r}")


def plan_integration(
    magnet: MagnetParams,
    omega0: float,
    omega_drive: float,
    settle_decay_times: float = 10.0,
    window_periods: int = 12,
    steps_per_period: Optional[int] = None,
) -> Tuple[float, float]:
    """(t_end, dt) that settles the transient and leaves ``window_periods`` drive periods.

    dt divides the drive period exactly and resolves the faster of the drive and
    the Larmor precession with ``steps_per_period`` steps.
    """
    if magnet.alpha <= 0:
        raise ValueError("settling requires alpha > 0")
    _require_drive_frequency(omega_drive)
    steps = steps_per_period or config.get("llg.steps_per_period", 100)
    t_drive = 2.0 * math.pi / omega_drive
    per_drive = int(math.ceil(steps * max(1.0, omega0 / omega_drive)))
    dt = t_drive / per_drive
    settle = settle_decay_times / (magnet.alpha * omega0) if omega0 > 0 else 0.0
    n_periods = math.ceil(settle / t_drive) + window_periods
    return n_periods * t_drive, dt


def integrate_llg(
    magnet: MagnetParams,
    drive: DriveState,
    h_amplitude: float,
    omega_drive: float,
    t_end: float,
    dt: float,
    m0: Optional[Sequence[float]] = None,
    record_stride: int = 1,
) -> PrecessionTrajectory:
    """Fixed-step trajectory of the unit magnetisation, starting along the bias by default."""
    if dt <= 0 or t_end <= 0:
        raise ValueError("t_end and dt must be positive")
    _require_drive_frequency(omega_drive)
    omega0 = kittel_frequency(magnet, drive)
    omega_ref = max(omega0, omega_drive)
    min_steps = config.get("llg.min_steps_per_larmor", 50)
    if omega_ref > 0 and dt > 2.0 * math.pi / omega_ref / min_steps:
        raise StepTooLargeError(
            f"dt={dt:.3e} s exceeds 1/{min_steps} of the precession period {2 * math.pi / omega_ref:.3e} s"
        )
    tolerance = config.get("llg.norm_defect_tolerance", 1e-6)

    pref = -magnet.gamma_ang / (1.0 + magnet.alpha ** 2)
    alpha = magnet.alpha
    bz = drive.h0_sign * drive.mu0_H0
    bh = constants.mu_0 * h_amplitude
    delta, phi, w = drive.delta, drive.phi, omega_drive

    def rhs(t: float, mx: float, my: float, mz: float):
        bx = bh * math.cos(w * t)
        by = bh * delta * math.cos(w * t + phi)
        # p = m x B
        px = my * bz - mz * by
        py = mz * bx - mx * bz
        pz = mx * by - my * bx
        # q = m x p
        qx = my * pz - mz * py
        qy = mz * px - mx * pz
        qz = mx * py - my * px
        return pref * (px + alpha * qx), pref * (py + alpha * qy), pref * (pz + alpha * qz)

    if m0 is None:
        mx, my, mz = 0.0, 0.0, float(drive.h0_sign)
    else:
        norm = math.sqrt(sum(c * c for c in m0))
        mx, my, mz = (float(c) / norm for c in m0)

    n_steps = int(round(t_end / dt))
    steps_per_larmor = max(1, int(math.ceil(2.0 * math.pi / omega_ref / dt))) if omega_ref > 0 else n_steps
    started = time.perf_counter()

    times = [0.0]
    ms = [(mx, my, mz)]
    hs = [(h_amplitude, h_amplitude * delta * math.cos(phi))]
    defect = 0.0
    half = 0.5 * dt
    for n in range(n_steps):
        t = n * dt
        k1 = rhs(t, mx, my, mz)
        k2 = rhs(t + half, mx + half * k1[0], my + half * k1[1], mz + half * k1[2])
        k3 = rhs(t + half, mx + half * k2[0], my + half * k2[1], mz + half * k2[2])
        k4 = rhs(t + dt, mx + dt * k3[0], my + dt * k3[1], mz + dt * k3[2])
        sixth = dt / 6.0
        mx += sixth * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        my += sixth * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        mz += sixth * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        norm = math.sqrt(mx * mx + my * my + mz * mz)
        defect += abs(1.0 - norm)
        mx, my, mz = mx / norm, my / norm, mz / norm

        if (n + 1) % steps_per_larmor == 0:
            if defect > tolerance:
                raise StepTooLargeError(
                    f"norm drifted by {defect:.2e} within one precession period; reduce dt"
                )
            defect = 0.0

        if (n + 1) % record_stride == 0:
            t_next = (n + 1) * dt
            times.append(t_next)
            ms.append((mx, my, mz))
            hs.append((h_amplitude * math.cos(w * t_next), h_amplitude * delta * math.cos(w * t_next + phi)))

    logger.debug(
        "llg_integrated",
        points=len(times),
        delta=delta,
        phi_deg=round(math.degrees(phi), 3),
        h0_sign=drive.h0_sign,
        duration_s=round(time.perf_counter() - started, 3),
    )
    return PrecessionTrajectory(
        times=np.array(times),
        m_unit=np.array(ms),
        drive_record=np.array(hs),
        omega_drive=omega_drive,
        h0_sign=drive.h0_sign,
    )


def _window(traj: PrecessionTrajectory, settle_fraction: Optional[float]):
    fraction = settle_fraction if settle_fraction is not None else config.get("llg.settle_fraction", 0.2)
    if not 0 < fraction <= 1:
        raise ValueError("settle_fraction must lie in (0, 1]")
    _require_drive_frequency(traj.omega_drive)
    t_total = traj.times[-1]
    t_start = t_total * (1.0 - fraction)
    period = 2.0 * math.pi / traj.omega_drive
    if (t_total - t_start) < 10.0 * period * (1.0 - 1e-9):
        raise ValueError("settled window must span at least 10 drive periods")
    mask = traj.times >= t_start
    return mask, t_start, period


def demodulate_response(
    traj: PrecessionTrajectory, settle_fraction: Optional[float] = None
) -> np.ndarray:
    """Complex transverse amplitudes (m_x, m_y) at the drive frequency.

    Least-squares lock-in over the settled window: m(t) ~ Re[M e^{i w t}] + offset.
    """
    mask, _, _ = _window(traj, settle_fraction)
    t = traj.times[mask]
    wt = traj.omega_drive * t
    design = np.column_stack([np.cos(wt), np.sin(wt), np.ones_like(wt)])
    result = []
    for axis in (0, 1):
        coef, *_ = np.linalg.lstsq(design, traj.m_unit[mask, axis], rcond=None)
        result.append(coef[0] - 1j * coef[1])
    return np.array(result, dtype=complex)


def steady_state_cone(
    traj: PrecessionTrajectory, settle_fraction: Optional[float] = None
) -> PrecessionCone:
    mask, _, period = _window(traj, settle_fraction)
    m = traj.m_unit[mask]
    sample_dt = traj.times[1] - traj.times[0]
    per_period = max(2, int(round(period / sample_dt)))
    n_periods = len(m) // per_period
    # whole periods only, aligned to the end of the trajectory
    m = m[len(m) - n_periods * per_period:]

    transverse = np.hypot(m[:, 0], m[:, 1])
    theta = np.arctan2(transverse, traj.h0_sign * m[:, 2])
    cone = float(np.mean(theta))

    floor = config.get("llg.cone_floor_rad", 1e-9)
    if cone <= floor:
        return PrecessionCone(cone_angle=cone, handedness=None, ellipticity=0.0)

    means = theta.reshape(n_periods, per_period).mean(axis=1)
    slope = np.polyfit(np.arange(n_periods, dtype=float), means, 1)[0]
    tolerance = config.get("llg.drift_tolerance", 0.01)
    if abs(slope) > tolerance * cone:
        raise NotSettledError(
            f"cone angle drifts {abs(slope) / cone:.2%} per period (limit {tolerance:.0%})"
        )

    angle = np.unwrap(np.arctan2(m[:, 1], m[:, 0]))
    turning = angle[-1] - angle[0]
    handedness = "with-field" if np.sign(turning) * traj.h0_sign > 0 else "against-field"

    xy = m[:, :2] - m[:, :2].mean(axis=0)
    eig = np.linalg.eigvalsh(np.cov(xy.T))
    ellipticity = float(math.sqrt(max(eig[0], 0.0) / eig[1])) if eig[1] > 0 else 0.0
    return PrecessionCone(cone_angle=cone, handedness=handedness, ellipticity=ellipticity)


def _cone_for_phi(args) -> PrecessionCone:
    magnet, drive, h_amplitude, omega_drive, t_end, dt, settle_fraction = args
    traj = integrate_llg(magnet, drive, h_amplitude, omega_drive, t_end, dt)
    return steady_state_cone(traj, settle_fraction)


def phi_sweep_cones(
    magnet: MagnetParams,
    drive: DriveState,
    phi_grid: Sequence[float],
    h_amplitude: float,
    omega_drive: float,
    t_end: float,
    dt: float,
    settle_fraction: Optional[float] = None,
    workers: Optional[int] = None,
) -> List[PrecessionCone]:
    """Steady cones for each port phase, returned in grid order.

    Independent trajectories run in a process pool when ``workers`` > 1
    (default from POLARITON_WORKERS via settings).
    """
    n_workers = workers or config.get("workers", 1)
    jobs = [
        (magnet, drive.replace(phi=float(phi)), h_amplitude, omega_drive, t_end, dt, settle_fraction)
        for phi in phi_grid
    ]
    started = time.perf_counter()
    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            cones = list(pool.map(_cone_for_phi, jobs))
    else:
        cones = [_cone_for_phi(job) for job in jobs]
    logger.info(
        "cone_sweep_complete",
        points=len(cones),
        delta=drive.delta,
        h0_sign=drive.h0_sign,
        workers=n_workers,
        duration_s=round(time.perf_counter() - started, 2),
    )
    return cones
