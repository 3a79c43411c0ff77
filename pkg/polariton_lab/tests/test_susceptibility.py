"""
Tests for the Polder susceptibility of the Kittel mode.
"""

import numpy as np
import pytest

from lib.params import GHZ
from lib.susceptibility import (
    chi_circular,
    chi_tensor,
    circular_basis,
    magnetisation_response,
)
from shared.errors import PoleError


class TestChiTensor:
    """Undamped and damped tensor components."""

    def test_half_frequency_values(self, params):
        """chi_a and chi_b at half the Kittel frequency."""
        chi = chi_tensor(params.magnet, 6.44 * GHZ, 3.22 * GHZ)
        assert chi.chi_a == pytest.approx(1.019, abs=1e-3)
        assert chi.chi_b == pytest.approx(0.509, abs=1e-3)

    def test_undamped_is_real(self, params):
        """Without damping both components are real."""
        chi = chi_tensor(params.magnet, 6.44 * GHZ, np.linspace(1, 5, 5) * GHZ)
        assert np.isrealobj(chi.chi_a)
        assert np.isrealobj(chi.chi_b)

    def test_static_limit(self, params):
        """At omega = 0 only chi_a survives, equal to omega_m/omega_0."""
        chi = chi_tensor(params.magnet, 6.44 * GHZ, 0.0)
        assert chi.chi_a == pytest.approx(4.9224 / 6.44, rel=1e-9)
        assert chi.chi_b == 0.0

    def test_bias_reversal_flips_chi_b_only(self, params):
        """Reversing the bias flips the gyrotropic term."""
        up = chi_tensor(params.magnet, 6.44 * GHZ, 3.0 * GHZ, h0_sign=1)
        down = chi_tensor(params.magnet, 6.44 * GHZ, 3.0 * GHZ, h0_sign=-1)
        assert down.chi_a == up.chi_a
        assert down.chi_b == -up.chi_b

    def test_pole_guard(self, params):
        """Undamped evaluation on the pole raises PoleError."""
        with pytest.raises(PoleError):
            chi_tensor(params.magnet, 6.44 * GHZ, 6.44 * GHZ)

    def test_damped_is_finite_at_resonance(self, params):
        """Damping keeps the resonance finite and absorptive."""
        chi = chi_tensor(params.magnet, 6.44 * GHZ, 6.44 * GHZ, damped=True)
        assert np.isfinite(chi.chi_a)
        assert np.imag(chi.chi_a) < 0

    def test_negative_frequency_rejected(self, params):
        """Negative frequencies are refused."""
        with pytest.raises(ValueError):
            chi_tensor(params.magnet, 6.44 * GHZ, -1.0)

    def test_matrix_is_hermitian_when_undamped(self, params):
        """Lossless tensor is Hermitian."""
        chi = chi_tensor(params.magnet, 6.44 * GHZ, 3.0 * GHZ)
        m = chi.matrix()
        assert np.allclose(m, m.conj().T)


class TestChiCircular:
    """Circular-basis response."""

    def test_half_frequency_values(self, params):
        """chi+ and chi- at half the Kittel frequency."""
        plus = chi_circular(params.magnet, 6.44 * GHZ, 3.22 * GHZ, +1)
        minus = chi_circular(params.magnet, 6.44 * GHZ, 3.22 * GHZ, -1)
        assert plus == pytest.approx(1.529, abs=1e-3)
        assert minus == pytest.approx(0.510, abs=1e-3)

    def test_equals_tensor_combinations(self, params):
        """chi+- = chi_a +- chi_b away from the pole."""
        omega = np.linspace(0.5, 12.0, 40) * GHZ
        omega = omega[np.abs(omega - 6.44 * GHZ) > 0.1 * GHZ]
        chi = chi_tensor(params.magnet, 6.44 * GHZ, omega)
        assert np.allclose(chi_circular(params.magnet, 6.44 * GHZ, omega, +1), chi.chi_a + chi.chi_b)
        assert np.allclose(chi_circular(params.magnet, 6.44 * GHZ, omega, -1), chi.chi_a - chi.chi_b)

    def test_resonant_branch_diverges_from_below(self, params):
        """chi+ grows without bound towards omega_0."""
        omegas = 6.44 * GHZ * (1.0 - np.array([1e-1, 1e-2, 1e-3, 1e-4]))
        values = chi_circular(params.magnet, 6.44 * GHZ, omegas, +1)
        assert np.all(np.diff(values) > 0)
        assert values[-1] > 1e3

    def test_non_resonant_branch_has_no_pole(self, params):
        """chi- stays finite at omega_0."""
        value = chi_circular(params.magnet, 6.44 * GHZ, 6.44 * GHZ, -1)
        assert value == pytest.approx(4.9224 / 12.88, rel=1e-9)

    def test_bias_reversal_swaps_branches(self, params):
        """A -z bias swaps the resonant and counter-rotating branches."""
        a = chi_circular(params.magnet, 6.44 * GHZ, 2.0 * GHZ, +1, h0_sign=-1)
        b = chi_circular(params.magnet, 6.44 * GHZ, 2.0 * GHZ, -1, h0_sign=1)
        assert a == pytest.approx(b)

    def test_invalid_handedness(self, params):
        """Handedness must be +1 or -1."""
        with pytest.raises(ValueError):
            chi_circular(params.magnet, 6.44 * GHZ, 1.0 * GHZ, 0)

    def test_tensor_acting_on_circular_basis(self, params):
        """The tensor maps a circular field onto chi+ times it."""
        omega0, omega = 6.44 * GHZ, 4.0 * GHZ
        chi = chi_tensor(params.magnet, omega0, omega)
        m = magnetisation_response(chi, circular_basis(+1))
        plus = chi_circular(params.magnet, omega0, omega, +1)
        assert np.allclose(m, plus * circular_basis(+1))


class TestGilbertDamping:
    """omega_0 -> omega_0 + i alpha omega."""

    def test_matches_fixed_linewidth_on_resonance(self, params):
        """At omega = omega_0 the Gilbert and fixed-eta forms coincide."""
        omega0 = 6.44 * GHZ
        magnet = params.magnet.model_copy(update={"alpha": 0.01})
        fixed = magnet.model_copy(update={"eta_kittel": 0.01 * omega0})
        gilbert = chi_tensor(magnet, omega0, omega0, gilbert=True)
        damped = chi_tensor(fixed, omega0, omega0, damped=True)
        assert gilbert.chi_a == pytest.approx(damped.chi_a, rel=1e-12)
        assert gilbert.chi_b == pytest.approx(damped.chi_b, rel=1e-12)

    def test_linewidth_scales_with_frequency(self, params):
        """Away from resonance the loss term follows alpha * omega."""
        omega0, omega = 6.44 * GHZ, 3.22 * GHZ
        magnet = params.magnet.model_copy(update={"alpha": 0.01})
        expected = magnet.omega_m / (omega0 + 1j * 0.01 * omega - omega)
        assert chi_circular(magnet, omega0, omega, +1, gilbert=True) == pytest.approx(expected, rel=1e-12)
        assert np.imag(chi_circular(magnet, omega0, omega, +1, gilbert=True)) < 0

    def test_gilbert_implies_damped(self, params):
        """No pole guard and complex output once Gilbert damping is on."""
        magnet = params.magnet.model_copy(update={"alpha": 0.01})
        chi = chi_tensor(magnet, 6.44 * GHZ, np.array([6.44, 7.0]) * GHZ, gilbert=True)
        assert np.iscomplexobj(chi.chi_a)
        assert np.all(np.isfinite(chi.chi_b))

    def test_chirality_ratio_on_resonance(self, params):
        """|chi+|/|chi-| = |2 + i alpha|/alpha at omega_0."""
        omega0 = 6.44 * GHZ
        magnet = params.magnet.model_copy(update={"alpha": 0.01})
        plus = chi_circular(magnet, omega0, omega0, +1, gilbert=True)
        minus = chi_circular(magnet, omega0, omega0, -1, gilbert=True)
        assert abs(plus) / abs(minus) == pytest.approx(abs(2.0 + 0.01j) / 0.01, rel=1e-12)

    def test_zero_alpha_keeps_pole_guard(self, params):
        """Without Gilbert damping the resonance is still guarded."""
        magnet = params.magnet.model_copy(update={"alpha": 0.0})
        with pytest.raises(PoleError):
            chi_circular(magnet, 6.44 * GHZ, 6.44 * GHZ, +1, gilbert=True)
