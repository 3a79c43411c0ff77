"""Polder susceptibility of the Kittel mode.

Phasors follow the drive convention h(t) = Re[h e^{i omega t}]. Damping enters as
omega_0 -> omega_0 + i*eta_kittel, which makes the resonant response m+ absorptive
(negative imaginary part) in this convention. The Gilbert form uses i*alpha*omega
instead, the exact linear response of the LLG equation.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from config.manager import config
from shared.errors import PoleError
from shared.models import MagnetParams

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class ChiTensor:
    chi_a: complex
    chi_b: complex

    def matrix(self) -> np.ndarray:
        """[[chi_a, i chi_b], [-i chi_b, chi_a]]; stacked along leading axes for array inputs."""
        a = np.asarray(self.chi_a, dtype=complex)
        b = np.asarray(self.chi_b, dtype=complex)
        return np.stack(
            [np.stack([a, 1j * b], axis=-1), np.stack([-1j * b, a], axis=-1)],
            axis=-2,
        )


def _effective_omega0(magnet: MagnetParams, omega0: ArrayLike, omega: ArrayLike, damped: bool, gilbert: bool):
    if gilbert and magnet.alpha > 0:
        return omega0 + 1j * magnet.alpha * np.asarray(omega)
    if damped:
        return omega0 + 1j * magnet.eta_kittel
    return omega0


def _guard_pole(omega0: ArrayLike, omega: ArrayLike, damped: bool) -> None:
    if damped:
        return
    guard = config.get("numerics.pole_guard", 1e-6)
    separation = np.abs(np.asarray(omega, dtype=float) - np.asarray(omega0, dtype=float))
    if np.any(separation <= guard * np.abs(omega0)):
        raise PoleError(f"undamped response evaluated within {guard:g}*omega0 of the pole")


def chi_tensor(
    magnet: MagnetParams,
    omega0: ArrayLike,
    omega: ArrayLike,
    h0_sign: int = 1,
    damped: bool = False,
    gilbert: bool = False,
) -> ChiTensor:
    """Tensor components; chi_b flips with the bias direction.

    ``gilbert`` damps with i*alpha*omega and implies ``damped`` when alpha > 0.
    """
    damped = damped or (gilbert and magnet.alpha > 0)
    if np.any(np.asarray(omega) < 0):
        raise ValueError("omega must be non-negative")
    _guard_pole(omega0, omega, damped)
    w0 = _effective_omega0(magnet, omega0, omega, damped, gilbert)
    denom = w0 * w0 - np.asarray(omega) ** 2
    chi_a = w0 * magnet.omega_m / denom
    chi_b = h0_sign * np.asarray(omega) * magnet.omega_m / denom
    if not damped:
        chi_a = np.real(chi_a)
        chi_b = np.real(chi_b)
    return ChiTensor(chi_a=chi_a, chi_b=chi_b)


def chi_circular(
    magnet: MagnetParams,
    omega0: ArrayLike,
    omega: ArrayLike,
    handedness: int,
    h0_sign: int = 1,
    damped: bool = False,
    gilbert: bool = False,
):
    """Scalar response to a circular drive of the given handedness (+1 right, -1 left).

    The resonant branch is the one whose handedness matches the precession sense,
    so reversing the bias swaps the roles of + and -.
    """
    if handedness not in (1, -1):
        raise ValueError("handedness must be +1 or -1")
    if np.any(np.asarray(omega) < 0):
        raise ValueError("omega must be non-negative")
    damped = damped or (gilbert and magnet.alpha > 0)
    s = handedness * h0_sign
    if s > 0:
        _guard_pole(omega0, omega, damped)
    w0 = _effective_omega0(magnet, omega0, omega, damped, gilbert)
    result = magnet.omega_m / (w0 - s * np.asarray(omega))
    return result if damped else np.real(result)


def magnetisation_response(chi: ChiTensor, h) -> np.ndarray:
    """m = chi . h for a complex transverse field phasor (h_x, h_y)."""
    return chi.matrix() @ np.asarray(h, dtype=complex)


def circular_basis(handedness: int) -> np.ndarray:
    """Unit-amplitude circular phasor: right (+1) is (1, -i)."""
    return np.array([1.0, -1j * handedness], dtype=complex)
