"""
Tests for macrospin LLG integration and the steady precession cone.

The damping is raised to alpha = 0.01 so a trajectory settles in a few hundred
drive periods.
"""

import dataclasses
import math

import numpy as np
import pytest

from lib.llg_dynamics import (
    PrecessionTrajectory,
    demodulate_response,
    integrate_llg,
    phi_sweep_cones,
    plan_integration,
    steady_state_cone,
)
from lib.params import kittel_frequency
from lib.susceptibility import chi_circular, chi_tensor, magnetisation_response
from shared.errors import NotSettledError, ParameterError, StepTooLargeError

ALPHA = 0.01
H_RATIO = 1e-4


@pytest.fixture
def magnet(params):
    return params.magnet.model_copy(update={"alpha": ALPHA})


@pytest.fixture
def plan(magnet, resonant_drive):
    omega0 = kittel_frequency(magnet, resonant_drive)
    t_end, dt = plan_integration(magnet, omega0, omega0)
    return omega0, t_end, dt


def _run(magnet, drive, plan):
    omega0, t_end, dt = plan
    return integrate_llg(magnet, drive, H_RATIO * magnet.Ms, omega0, t_end, dt)


def _drive_phasor(drive, h):
    return np.array([h, drive.delta * np.exp(1j * drive.phi) * h], dtype=complex)


class TestPlanning:
    """Step size and duration."""

    def test_step_divides_drive_period(self, plan):
        """100 steps per period, whole periods overall."""
        omega0, t_end, dt = plan
        period = 2.0 * math.pi / omega0
        assert period / dt == pytest.approx(100.0)
        assert (t_end / period) == pytest.approx(round(t_end / period))

    def test_duration_covers_settling(self, magnet, plan):
        """Ten decay times plus the averaging window."""
        omega0, t_end, _ = plan
        settle = 10.0 / (ALPHA * omega0)
        assert t_end >= settle + 12 * 2.0 * math.pi / omega0 * (1 - 1e-12)

    def test_zero_damping_cannot_settle(self, params, resonant_drive):
        """alpha = 0 never reaches a steady cone."""
        omega0 = kittel_frequency(params.magnet, resonant_drive)
        with pytest.raises(ValueError):
            plan_integration(params.magnet.model_copy(update={"alpha": 0.0}), omega0, omega0)

    def test_slow_drive_still_resolves_precession(self, magnet, resonant_drive):
        """Below resonance the step follows the Larmor period."""
        omega0 = kittel_frequency(magnet, resonant_drive)
        _, dt = plan_integration(magnet, omega0, 0.5 * omega0)
        assert dt <= 2.0 * math.pi / omega0 / 100 * (1 + 1e-12)

    @pytest.mark.parametrize("omega_drive", [0.0, -1.0, float("inf")])
    def test_drive_frequency_must_be_positive(self, magnet, resonant_drive, omega_drive):
        """A static or negative drive has no period to plan over."""
        omega0 = kittel_frequency(magnet, resonant_drive)
        with pytest.raises(ParameterError):
            plan_integration(magnet, omega0, omega_drive)


class TestIntegration:
    """RK4 trajectory properties."""

    def test_unit_norm_preserved(self, magnet, resonant_drive):
        """|m| stays one."""
        omega0 = kittel_frequency(magnet, resonant_drive)
        dt = 2.0 * math.pi / omega0 / 100
        traj = integrate_llg(magnet, resonant_drive, H_RATIO * magnet.Ms, omega0, 200 * dt * 20, dt)
        norms = np.linalg.norm(traj.m_unit, axis=1)
        assert np.allclose(norms, 1.0, atol=1e-12)

    def test_free_precession_is_counter_clockwise_for_up_bias(self, magnet, resonant_drive):
        """Undriven precession turns right-handed about +z."""
        omega0 = kittel_frequency(magnet, resonant_drive)
        dt = 2.0 * math.pi / omega0 / 200
        traj = integrate_llg(magnet, resonant_drive, 0.0, omega0, 50 * dt, dt, m0=(0.05, 0.0, 1.0))
        azimuth = np.unwrap(np.arctan2(traj.m_unit[:, 1], traj.m_unit[:, 0]))
        assert azimuth[-1] > azimuth[0]

    def test_coarse_step_rejected(self, magnet, resonant_drive):
        """Twenty steps per period is too coarse."""
        omega0 = kittel_frequency(magnet, resonant_drive)
        dt = 2.0 * math.pi / omega0 / 20
        with pytest.raises(StepTooLargeError):
            integrate_llg(magnet, resonant_drive, H_RATIO * magnet.Ms, omega0, 100 * dt, dt)

    def test_invalid_duration(self, magnet, resonant_drive):
        """t_end must be positive."""
        with pytest.raises(ValueError):
            integrate_llg(magnet, resonant_drive, 1.0, 1e10, 0.0, 1e-12)

    def test_static_drive_rejected(self, magnet, resonant_drive):
        """omega_drive = 0 is refused before integrating."""
        with pytest.raises(ParameterError):
            integrate_llg(magnet, resonant_drive, 1.0, 0.0, 1e-9, 1e-12)

    def test_record_stride_thins_output(self, magnet, resonant_drive):
        """Every fourth step is kept."""
        omega0 = kittel_frequency(magnet, resonant_drive)
        dt = 2.0 * math.pi / omega0 / 100
        traj = integrate_llg(magnet, resonant_drive, H_RATIO * magnet.Ms, omega0, 400 * dt, dt, record_stride=4)
        assert len(traj.times) == 101
        assert traj.times[1] == pytest.approx(4 * dt)


class TestSteadyState:
    """Linear response and chirality of the settled cone."""

    def test_linear_drive_matches_polder_tensor(self, magnet, resonant_drive, plan):
        """On resonance the lock-in amplitudes equal chi . h within 1%."""
        omega0, _, _ = plan
        traj = _run(magnet, resonant_drive, plan)
        response = demodulate_response(traj) * magnet.Ms
        chi = chi_tensor(magnet, omega0, omega0, gilbert=True)
        h = H_RATIO * magnet.Ms
        expected = np.array([chi.chi_a * h, -1j * chi.chi_b * h])
        assert np.allclose(response, expected, rtol=0.01, atol=0.0)

    @pytest.mark.parametrize("fraction", np.linspace(0.5, 1.5, 21))
    def test_response_tracks_gilbert_susceptibility(self, magnet, resonant_drive, fraction):
        """Amplitude and phase stay within 1% of the Gilbert-damped tensor across the line."""
        drive = resonant_drive.replace(delta=0.5, phi=0.3)
        omega0 = kittel_frequency(magnet, drive)
        omega = float(fraction) * omega0
        t_end, dt = plan_integration(magnet, omega0, omega)
        h = H_RATIO * magnet.Ms
        traj = integrate_llg(magnet, drive, h, omega, t_end, dt)
        response = demodulate_response(traj) * magnet.Ms
        expected = magnetisation_response(chi_tensor(magnet, omega0, omega, gilbert=True), _drive_phasor(drive, h))
        assert np.allclose(response, expected, rtol=0.01, atol=0.0)

    def test_demodulation_needs_a_drive_frequency(self, magnet, resonant_drive, plan):
        """A trajectory relabelled as static cannot be demodulated."""
        traj = _run(magnet, resonant_drive, plan)
        with pytest.raises(ParameterError):
            demodulate_response(dataclasses.replace(traj, omega_drive=0.0))
        with pytest.raises(ParameterError):
            steady_state_cone(dataclasses.replace(traj, omega_drive=0.0))

    def test_matched_drive_opens_wide_cone(self, magnet, matched_drive, plan):
        """Co-rotating drive: cone of |chi+| h, circular, turning with the field."""
        omega0, _, _ = plan
        cone = steady_state_cone(_run(magnet, matched_drive, plan))
        expected = abs(chi_circular(magnet, omega0, omega0, +1, gilbert=True)) * H_RATIO
        assert cone.cone_angle == pytest.approx(expected, rel=0.01)
        assert cone.handedness == "with-field"
        assert cone.ellipticity == pytest.approx(1.0, abs=0.02)

    def test_opposed_drive_barely_tilts(self, magnet, matched_drive, opposed_drive, plan):
        """Cone ratio follows |chi+|/|chi-| at resonance, about 2/alpha."""
        omega0, _, _ = plan
        wide = steady_state_cone(_run(magnet, matched_drive, plan))
        narrow = steady_state_cone(_run(magnet, opposed_drive, plan))
        assert narrow.handedness == "against-field"
        chirality = abs(chi_circular(magnet, omega0, omega0, +1, gilbert=True)) / abs(
            chi_circular(magnet, omega0, omega0, -1, gilbert=True)
        )
        assert chirality == pytest.approx(2.0 / ALPHA, rel=1e-3)
        assert wide.cone_angle / narrow.cone_angle == pytest.approx(chirality, rel=0.1)

    def test_reversed_bias_swaps_roles(self, magnet, matched_drive, opposed_drive, plan):
        """With -z bias the left-circular drive opens the wide cone."""
        down_matched = steady_state_cone(_run(magnet, opposed_drive.replace(h0_sign=-1), plan))
        down_opposed = steady_state_cone(_run(magnet, matched_drive.replace(h0_sign=-1), plan))
        assert down_matched.handedness == "with-field"
        assert down_matched.cone_angle / down_opposed.cone_angle > 100

    def test_unsettled_window_detected(self, magnet, matched_drive, plan):
        """A still-opening cone raises NotSettledError."""
        omega0, _, dt = plan
        period = 2.0 * math.pi / omega0
        # 30 periods is about two decay times: the cone is still opening
        traj = integrate_llg(magnet, matched_drive, H_RATIO * magnet.Ms, omega0, 30 * period, dt)
        with pytest.raises(NotSettledError):
            steady_state_cone(traj, settle_fraction=0.5)

    def test_short_window_rejected(self, magnet, matched_drive, plan):
        """Fewer than ten periods in the window is refused."""
        omega0, _, dt = plan
        period = 2.0 * math.pi / omega0
        traj = integrate_llg(magnet, matched_drive, H_RATIO * magnet.Ms, omega0, 20 * period, dt)
        with pytest.raises(ValueError):
            steady_state_cone(traj, settle_fraction=0.2)

    def test_zero_drive_reports_no_handedness(self, magnet, resonant_drive):
        """No drive, no cone, no handedness."""
        omega0 = kittel_frequency(magnet, resonant_drive)
        period = 2.0 * math.pi / omega0
        traj = integrate_llg(magnet, resonant_drive, 0.0, omega0, 20 * period, period / 100)
        cone = steady_state_cone(traj, settle_fraction=0.5)
        assert cone.handedness is None
        assert cone.cone_angle == 0.0


class TestPhiSweep:
    """Cones over port phase."""

    def test_sweep_order_and_extremes(self, magnet, matched_drive, plan):
        """Cones shrink from the matched to the opposed phase."""
        omega0, t_end, dt = plan
        phis = [-math.pi / 2, 0.0, math.pi / 2]
        cones = phi_sweep_cones(
            magnet, matched_drive, phis, H_RATIO * magnet.Ms, omega0, t_end, dt, workers=1
        )
        angles = [c.cone_angle for c in cones]
        assert angles[0] > angles[1] > angles[2]
        assert isinstance(cones[0].ellipticity, float)

    def test_process_pool_matches_serial(self, magnet, matched_drive, plan):
        """Parallel workers return the serial cones in grid order."""
        omega0, t_end, dt = plan
        phis = [math.pi / 2, -math.pi / 2]
        args = (magnet, matched_drive, phis, H_RATIO * magnet.Ms, omega0, t_end, dt)
        serial = phi_sweep_cones(*args, workers=1)
        parallel = phi_sweep_cones(*args, workers=2)
        assert parallel == serial
        assert parallel[1].cone_angle > parallel[0].cone_angle

    def test_trajectory_container(self, magnet, resonant_drive):
        """Trajectory records time, unit vector and applied field."""
        omega0 = kittel_frequency(magnet, resonant_drive)
        dt = 2.0 * math.pi / omega0 / 100
        traj = integrate_llg(magnet, resonant_drive, 1.0, omega0, 10 * dt, dt)
        assert isinstance(traj, PrecessionTrajectory)
        assert traj.m_unit.shape == (11, 3)
        assert traj.drive_record.shape == (11, 2)
