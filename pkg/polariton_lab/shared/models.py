"""Parameter models and result containers shared by every polariton_lab module.

Units: angular frequencies in rad/s, fields as inductions in tesla, lengths in metres.
The gyromagnetic ratio is stored in GHz/T of linear frequency (the laboratory
convention) and converted with 2*pi on every read.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import constants


# =============================================================================
# Physical parameters (immutable value objects)
# =============================================================================


class MagnetParams(BaseModel):
    """Material constants of the magnetic sphere."""

    model_config = ConfigDict(frozen=True)

    mu0_Ms: float = Field(..., gt=0, description="Saturation induction mu0*Ms [T]")
    gamma: float = Field(..., gt=0, description="Gyromagnetic ratio [GHz/T, linear frequency]")
    rho: float = Field(..., gt=0, description="Spin density [1/m^3]")
    sample_diameter: float = Field(..., gt=0, description="Sphere diameter [m]")
    alpha: float = Field(0.0, ge=0, description="Gilbert damping [dimensionless]")
    eta_kittel: float = Field(0.0, ge=0, description="Kittel-mode decay rate [rad/s]")

    @property
    def gamma_ang(self) -> float:
        """Angular gyromagnetic ratio [rad/(s*T)]."""
        return 2.0 * math.pi * self.gamma * 1e9

    @property
    def omega_m(self) -> float:
        return self.gamma_ang * self.mu0_Ms

    @property
    def sample_volume(self) -> float:
        return math.pi / 6.0 * self.sample_diameter ** 3

    @property
    def spin_count(self) -> float:
        return self.rho * self.sample_volume

    @property
    def Ms(self) -> float:
        """Saturation magnetisation [A/m]."""
        return self.mu0_Ms / constants.mu_0


class CavityParams(BaseModel):
    """Rectangular cavity with two excited TE_mn0 modes (port 1 first)."""

    model_config = ConfigDict(frozen=True)

    a: float = Field(..., gt=0, description="Inner width along x [m]")
    b: float = Field(..., gt=0, description="Inner width along y [m]")
    c: float = Field(..., gt=0, description="Inner height along z [m]")
    omega_c: float = Field(..., gt=0, description="Cavity resonance [rad/s]")
    kappa: float = Field(..., gt=0, description="Photon decay rate (HWHM) [rad/s]")
    modes: Tuple[Tuple[int, int], Tuple[int, int]] = ((1, 2), (2, 1))

    @field_validator("modes")
    @classmethod
    def _check_modes(cls, v):
        for m, n in v:
            if m < 0 or n < 0 or (m == 0 and n == 0):
                raise ValueError(f"invalid TE mode indices ({m}, {n})")
        return v

    @property
    def volume(self) -> float:
        return self.a * self.b * self.c

    @property
    def centre(self) -> Tuple[float, float]:
        return (self.a / 2.0, self.b / 2.0)

    @property
    def is_square(self) -> bool:
        return math.isclose(self.a, self.b, rel_tol=1e-12)


class DriveState(BaseModel):
    """Two-port drive settings plus bias field: the experiment's control knobs."""

    model_config = ConfigDict(frozen=True)

    delta: float = Field(0.0, ge=0, le=1, description="Port amplitude ratio")
    phi: float = Field(0.0, description="Relative port phase [rad], wrapped to (-pi, pi]")
    h0_sign: Literal[1, -1] = Field(1, description="Bias direction along +z or -z")
    mu0_H0: float = Field(0.0, ge=0, description="Bias induction magnitude [T]")
    probe_power: float = Field(0.0, ge=0, description="Probe power D_c [W]")

    @field_validator("phi")
    @classmethod
    def _wrap_phi(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("phi must be finite")
        if -math.pi < v <= math.pi:
            return v
        return math.pi - math.fmod(math.fmod(math.pi - v, 2 * math.pi) + 2 * math.pi, 2 * math.pi)

    @property
    def sigma(self) -> int:
        """Chirality sign of the polarisation bracket."""
        return -self.h0_sign

    def replace(self, **changes: Any) -> "DriveState":
        """Validated copy with some fields changed."""
        return DriveState(**{**self.model_dump(), **changes})


class CouplingParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    g: float = Field(..., ge=0, description="Bare magnon-photon coupling [rad/s]")
    eta_overlap: float = Field(1.0, gt=0, le=1, description="Spatial overlap integral")


class SystemParams(BaseModel):
    """Magnet + cavity + coupling bundle passed to the sweep builders."""

    model_config = ConfigDict(frozen=True)

    magnet: MagnetParams
    cavity: CavityParams
    coupling: CouplingParams

    @model_validator(mode="after")
    def _sample_fits(self):
        if self.cavity.volume <= self.magnet.sample_volume:
            raise ValueError("cavity volume must exceed the sample volume")
        return self


# =============================================================================
# Array results
# =============================================================================


@dataclass(frozen=True)
class ComplexSpectrum:
    """Complex S11 on a frequency grid [rad/s]."""

    freq_grid: np.ndarray
    s11: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if np.shape(self.freq_grid) != np.shape(self.s11):
            raise ValueError("freq_grid and s11 must have the same shape")

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.s11)

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.s11)


@dataclass(frozen=True)
class SpectralMap:
    """Values on a (axis1 x axis2) grid, row-major over axis1.

    ``values`` is complex S11 for spectral sweeps and real for derived maps
    such as splitting heat maps.
    """

    axis1_name: str
    axis1: np.ndarray
    axis2_name: str
    axis2: np.ndarray
    values: np.ndarray
    quantity: str = "s11"
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        expected = (len(self.axis1), len(self.axis2))
        if np.shape(self.values) != expected:
            raise ValueError(f"values shape {np.shape(self.values)} != {expected}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("map values must be finite")

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.values)

    def row(self, index: int) -> ComplexSpectrum:
        meta = dict(self.metadata)
        meta[self.axis1_name] = float(self.axis1[index])
        return ComplexSpectrum(
            freq_grid=np.asarray(self.axis2, dtype=float),
            s11=np.asarray(self.values[index], dtype=complex),
            metadata=meta,
        )


# =============================================================================
# Run configuration (versioned JSON/YAML recipes)
# =============================================================================

SweepKind = Literal[
    "field-sweep",
    "phase-sweep",
    "delta-phi-map",
    "llg-cone",
    "fit",
    "ingest",
    "chi-curve",
]

SpectraFormat = Literal["complex", "polar", "map"]


class GridSpec(BaseModel):
    """Linear grid from ``start`` to ``stop`` inclusive."""

    model_config = ConfigDict(extra="forbid")

    start: float
    stop: float
    points: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _check_range(self):
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError("grid bounds must be finite")
        if self.points > 1 and self.start == self.stop:
            raise ValueError("empty sweep range: start == stop with more than one point")
        return self

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


class DriveSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    delta: float = Field(0.0, ge=0, le=1)
    phi_deg: float = 0.0
    h0_sign: Literal[1, -1] = 1
    probe_power_W: Optional[float] = Field(None, ge=0)


class LLGSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    h_amplitude_ratio: float = Field(1e-4, gt=0, lt=1, description="Drive amplitude / Ms")
    alpha: Optional[float] = Field(None, gt=0)
    drive_over_kittel: float = Field(1.0, gt=0, description="omega_drive / omega_0")
    settle_decay_times: float = Field(10.0, gt=0)
    window_periods: int = Field(12, ge=10)
    steps_per_period: Optional[int] = Field(None, ge=10)


class FitSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    input: str
    format: SpectraFormat = "polar"
    linear_baseline: bool = False
    average: bool = False


class OutputSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directory: str = "output"
    stem: Optional[str] = None
    phase: bool = True
    pgm: bool = False


class RunConfig(BaseModel):
    """One reproducible run. Exactly one sweep kind; the grids it needs must be present."""

    model_config = ConfigDict(extra="forbid")

    version: Literal[1] = 1
    sweep: SweepKind
    recipe: Optional[str] = None
    preset: Optional[Literal["reference"]] = "reference"
    magnet: Optional[MagnetParams] = None
    cavity: Optional[CavityParams] = None
    coupling: Optional[CouplingParams] = None
    drive: DriveSpec = Field(default_factory=DriveSpec)
    field_mT: Optional[GridSpec] = None
    detuning_MHz: Optional[GridSpec] = None
    phi_deg: Optional[GridSpec] = None
    delta: Optional[GridSpec] = None
    frequency_GHz: Optional[GridSpec] = None
    theory: Literal["input-output", "perturbation"] = "input-output"
    overlay: Optional[Literal["calibrated", "first-principles"]] = None
    quadrature_order: Optional[int] = Field(None, ge=2)
    llg: LLGSpec = Field(default_factory=LLGSpec)
    fit: Optional[FitSpec] = None
    output: OutputSpec = Field(default_factory=OutputSpec)

    @model_validator(mode="after")
    def _check_sweep_inputs(self):
        required: Dict[str, List[str]] = {
            "field-sweep": ["detuning_MHz"],
            "phase-sweep": ["phi_deg", "detuning_MHz"],
            "delta-phi-map": ["delta", "phi_deg"],
            "llg-cone": ["phi_deg"],
            "fit": ["fit"],
            "ingest": ["fit"],
            "chi-curve": ["frequency_GHz"],
        }
        missing = [name for name in required[self.sweep] if getattr(self, name) is None]
        if missing:
            raise ValueError(f"sweep '{self.sweep}' requires: {', '.join(missing)}")
        if self.delta is not None and (
            min(self.delta.start, self.delta.stop) < 0 or max(self.delta.start, self.delta.stop) > 1
        ):
            raise ValueError("delta grid must lie within [0, 1]")
        if self.preset is None and None in (self.magnet, self.cavity, self.coupling):
            raise ValueError("without a preset, magnet, cavity and coupling must all be given")
        return self
