"""TE_mn0 magnetic field profiles of the rectangular cavity and their energy integrals.

Port 1 excites ``cavity.modes[0]``, port 2 excites ``cavity.modes[1]`` with complex
weight delta*e^{i phi}. The port-2 mode is phase-referenced at the sample position
(cavity centre) so its transverse component there is in phase with port 1's; the
reference factor has unit modulus and leaves every energy unchanged.

Handedness: "right" means the real field vector Re[h e^{i omega t}] rotates
counter-clockwise viewed from +z.
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import constants

from config.manager import config
from shared.errors import DegenerateFieldError, OutOfCavityError, UnsupportedModePairError
from shared.logger import get_logger
from shared.models import CavityParams, DriveState, MagnetParams

logger = get_logger("CavityFields")

Mode = Tuple[int, int]
Point = Tuple[float, float]

_EDGE_TOL = 1e-12
_LINEAR_TOL = 1e-12


@dataclass(frozen=True)
class ModeField:
    amplitude: float
    indices: Mode
    kappa0x: float
    kappa0y: float


@dataclass(frozen=True)
class PolarisationEllipse:
    axial_ratio: float
    handedness: str  # "right", "left" or "linear"
    major_axis_angle: float


def mode_field(cavity: CavityParams, mode: Mode, amplitude: float = 1.0) -> ModeField:
    m, n = mode
    return ModeField(
        amplitude=amplitude,
        indices=(m, n),
        kappa0x=m * math.pi / cavity.a,
        kappa0y=n * math.pi / cavity.b,
    )


def te_eigenfrequency(cavity: CavityParams, mode: Mode, l: int = 0) -> float:
    """Empty-box resonance of TE_mnl [rad/s]."""
    m, n = mode
    k2 = (m * math.pi / cavity.a) ** 2 + (n * math.pi / cavity.b) ** 2 + (l * math.pi / cavity.c) ** 2
    return constants.c * math.sqrt(k2)


def _check_point(cavity: CavityParams, point: Point) -> None:
    x, y = point
    tol_x = _EDGE_TOL * cavity.a
    tol_y = _EDGE_TOL * cavity.b
    if not (-tol_x <= x <= cavity.a + tol_x and -tol_y <= y <= cavity.b + tol_y):
        raise OutOfCavityError(f"point ({x:g}, {y:g}) m is outside the {cavity.a:g} x {cavity.b:g} m box")


def _mode_components(cavity: CavityParams, mode: Mode, x, y, amplitude: float = 1.0):
    """Vectorised (h_x, h_y) of one TE_mn0 mode."""
    f = mode_field(cavity, mode, amplitude)
    pref = amplitude / (cavity.omega_c * constants.mu_0)
    hx = 1j * pref * f.kappa0y * np.sin(f.kappa0x * x) * np.cos(f.kappa0y * y)
    hy = -1j * pref * f.kappa0x * np.cos(f.kappa0x * x) * np.sin(f.kappa0y * y)
    return hx, hy


def te_mode_field(
    cavity: CavityParams, mode: Mode, point: Point, amplitude: float = 1.0
) -> np.ndarray:
    """Complex (h_x, h_y) of a TE_mn0 mode at ``point``; h_z vanishes for l = 0."""
    _check_point(cavity, point)
    hx, hy = _mode_components(cavity, mode, point[0], point[1], amplitude)
    return np.array([hx, hy], dtype=complex)


def port_phase_reference(cavity: CavityParams) -> complex:
    """Unit factor aligning port 2's centre field with port 1's."""
    x0, y0 = cavity.centre
    h1x, h1y = _mode_components(cavity, cavity.modes[0], x0, y0)
    h2x, h2y = _mode_components(cavity, cavity.modes[1], x0, y0)
    ref1 = h1x if abs(h1x) >= abs(h1y) else h1y
    ref2 = h2y if abs(h2y) >= abs(h2x) else h2x
    if ref1 == 0 or ref2 == 0:
        return 1.0 + 0j
    return complex((ref1 / abs(ref1)) / (ref2 / abs(ref2)))


def _superposed_components(cavity: CavityParams, drive: DriveState, x, y, amplitude: float = 1.0):
    h1x, h1y = _mode_components(cavity, cavity.modes[0], x, y, amplitude)
    h2x, h2y = _mode_components(cavity, cavity.modes[1], x, y, amplitude)
    w = drive.delta * np.exp(1j * drive.phi) * port_phase_reference(cavity)
    return h1x + w * h2x, h1y + w * h2y


def superposed_field(
    cavity: CavityParams,
    drive: DriveState,
    point: Optional[Point] = None,
    amplitude: float = 1.0,
) -> np.ndarray:
    """Two-port field h(mode 1) + delta e^{i phi} h(mode 2); default point is the centre."""
    point = cavity.centre if point is None else point
    _check_point(cavity, point)
    hx, hy = _superposed_components(cavity, drive, point[0], point[1], amplitude)
    return np.array([hx, hy], dtype=complex)


def polarisation_ellipse(h: Sequence[complex]) -> PolarisationEllipse:
    """Ellipse traced by Re[h e^{i omega t}] from its Stokes parameters."""
    hx, hy = complex(h[0]), complex(h[1])
    s0 = abs(hx) ** 2 + abs(hy) ** 2
    if s0 == 0.0:
        raise DegenerateFieldError("field vanishes; polarisation undefined")
    s1 = abs(hx) ** 2 - abs(hy) ** 2
    s2 = 2.0 * (hx.conjugate() * hy).real
    # positive for counter-clockwise rotation viewed from +z
    s3 = -2.0 * (hx.conjugate() * hy).imag

    angle = 0.5 * math.atan2(s2, s1)
    ratio_s3 = max(-1.0, min(1.0, s3 / s0))
    if abs(ratio_s3) < _LINEAR_TOL:
        return PolarisationEllipse(axial_ratio=0.0, handedness="linear", major_axis_angle=angle)
    axial = abs(math.tan(0.5 * math.asin(ratio_s3)))
    return PolarisationEllipse(
        axial_ratio=min(axial, 1.0),
        handedness="right" if s3 > 0 else "left",
        major_axis_angle=angle,
    )


def polarisation_at_point(
    cavity: CavityParams, drive: DriveState, point: Optional[Point] = None
) -> PolarisationEllipse:
    return polarisation_ellipse(superposed_field(cavity, drive, point))


def _require_supported_pair(cavity: CavityParams) -> None:
    pair = tuple(sorted(cavity.modes))
    if not cavity.is_square or pair != ((1, 2), (2, 1)):
        raise UnsupportedModePairError(
            "closed-form cavity energy is derived for a square box with the (1,2)/(2,1) pair"
        )


def cavity_energy_analytic(cavity: CavityParams, drive: DriveState, amplitude: float = 1.0) -> float:
    """W_c = 5 pi^2 (1 + delta^2) c A^2 / (2 mu0 omega_c^2)."""
    _require_supported_pair(cavity)
    return (
        5.0 * math.pi ** 2 * (1.0 + drive.delta ** 2) * cavity.c * amplitude ** 2
        / (2.0 * constants.mu_0 * cavity.omega_c ** 2)
    )


def _cross_section_rule(cavity: CavityParams, order: int):
    if order < 2:
        raise ValueError("quadrature_order must be at least 2")
    nodes, weights = leggauss(order)
    xs = 0.5 * cavity.a * (nodes + 1.0)
    ys = 0.5 * cavity.b * (nodes + 1.0)
    wx = 0.5 * cavity.a * weights
    wy = 0.5 * cavity.b * weights
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    W = np.outer(wx, wy)
    return X, Y, W


def cavity_energy_numeric(
    cavity: CavityParams,
    drive: DriveState,
    quadrature_order: Optional[int] = None,
    amplitude: float = 1.0,
) -> float:
    """W_c = 2 * integral of mu0 |h_c|^2 over the box, by Gauss-Legendre per axis.

    The l = 0 fields do not depend on z, so the height integral is exact.
    """
    order = quadrature_order or config.get("numerics.quadrature_order", 32)
    X, Y, W = _cross_section_rule(cavity, order)
    hx, hy = _superposed_components(cavity, drive, X, Y, amplitude)
    integrand = np.abs(hx) ** 2 + np.abs(hy) ** 2
    return float(2.0 * constants.mu_0 * cavity.c * np.sum(W * integrand))


def mode_overlap_integrals(
    cavity: CavityParams, quadrature_order: Optional[int] = None
) -> Dict[str, float]:
    """Cross-section integrals of h_i h_j* per component for the two port modes.

    Keys: ``xx_11``, ``xx_22``, ``xx_12``, ``yy_11``, ``yy_22``, ``yy_12`` and the
    mixed ``xy_12``/``yx_12`` cross-terms (magnitudes).
    """
    order = quadrature_order or config.get("numerics.quadrature_order", 32)
    X, Y, W = _cross_section_rule(cavity, order)
    h1x, h1y = _mode_components(cavity, cavity.modes[0], X, Y)
    h2x, h2y = _mode_components(cavity, cavity.modes[1], X, Y)

    def integral(u, v) -> float:
        return float(abs(np.sum(W * u * np.conj(v))))

    return {
        "xx_11": integral(h1x, h1x),
        "xx_22": integral(h2x, h2x),
        "xx_12": integral(h2x, h1x),
        "yy_11": integral(h1y, h1y),
        "yy_22": integral(h2y, h2y),
        "yy_12": integral(h2y, h1y),
        "xy_12": integral(h1x, h2y),
        "yx_12": integral(h1y, h2x),
    }


def polarisation_factor(drive: DriveState) -> float:
    """1 + delta^2 + 2 sigma delta sin(phi)."""
    return 1.0 + drive.delta ** 2 + 2.0 * drive.sigma * drive.delta * math.sin(drive.phi)


def _check_sample_inside(cavity: CavityParams, magnet: MagnetParams, position: Point) -> None:
    r = magnet.sample_diameter / 2.0
    x, y = position
    if x - r < 0 or x + r > cavity.a or y - r < 0 or y + r > cavity.b or 2 * r > cavity.c:
        raise OutOfCavityError(
            f"sphere of diameter {magnet.sample_diameter:g} m at ({x:g}, {y:g}) m does not fit in the cavity"
        )


def _sphere_mean_square(cavity: CavityParams, magnet: MagnetParams, position: Point, order: int) -> float:
    """Volume average of |h_1|^2 over the sphere (spherical Gauss-Legendre product rule)."""
    R = magnet.sample_diameter / 2.0
    nodes, weights = leggauss(order)
    r = 0.5 * R * (nodes + 1.0)
    wr = 0.5 * R * weights
    cos_t = nodes
    wt = weights
    phi = math.pi * (nodes + 1.0)
    wp = math.pi * weights

    rr, ct, pp = np.meshgrid(r, cos_t, phi, indexing="ij")
    st = np.sqrt(1.0 - ct ** 2)
    x = position[0] + rr * st * np.cos(pp)
    y = position[1] + rr * st * np.sin(pp)
    hx, hy = _mode_components(cavity, cavity.modes[0], x, y)
    weight = (wr[:, None, None] * wt[None, :, None] * wp[None, None, :]) * rr ** 2
    total = np.sum(weight * (np.abs(hx) ** 2 + np.abs(hy) ** 2))
    return float(total / magnet.sample_volume)


def sample_energy(
    cavity: CavityParams,
    drive: DriveState,
    magnet: MagnetParams,
    sample_position: Optional[Point] = None,
    amplitude: float = 1.0,
    uniform_field: bool = True,
    quadrature_order: Optional[int] = None,
) -> float:
    """Magnetic energy W_p at the sphere, polarisation factor included.

    ``uniform_field`` evaluates |h|^2 at the sphere centre; otherwise it is
    averaged over the sphere volume.
    """
    position = cavity.centre if sample_position is None else sample_position
    _check_sample_inside(cavity, magnet, position)
    if uniform_field:
        h = te_mode_field(cavity, cavity.modes[0], position, amplitude)
        mean_square = float(np.sum(np.abs(h) ** 2))
    else:
        order = quadrature_order or config.get("numerics.sphere_quadrature_order", 12)
        mean_square = _sphere_mean_square(cavity, magnet, position, order) * amplitude ** 2
    return polarisation_factor(drive) * constants.mu_0 * mean_square * magnet.sample_volume
