import yaml
from typing import List, Any, Optional
from pathlib import Path
from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv

# Load .env explicitly
load_dotenv()


class PresetConfig(BaseModel):
    """Reference parameter set, in laboratory units (GHz, MHz, T, m)."""

    mu0_Ms_T: float = 0.1758
    gamma_GHz_per_T: float = 28.0
    rho_per_m3: float = 4.22e27
    sample_diameter_m: float = 0.25e-3
    eta_kittel_MHz: float = 0.7
    alpha_reference_field_T: float = 0.230
    alpha: Optional[float] = None
    cavity_a_m: float = 0.050
    cavity_b_m: float = 0.050
    cavity_c_m: float = 0.005
    omega_c_GHz: float = 6.44
    kappa_MHz: float = 4.45
    g_MHz: float = 3.9
    eta_overlap: float = 1.0
    modes: List[List[int]] = Field(default_factory=lambda: [[1, 2], [2, 1]])
    probe_power_W: float = 1.0e-6


class NumericsConfig(BaseModel):
    pole_guard: float = 1.0e-6
    quadrature_order: int = 32
    sphere_quadrature_order: int = 12
    root_xtol_rel: float = 1.0e-12
    dip_prominence_floor: float = 0.05
    splitting_resolution_kHz: float = 1.0
    splitting_span_kappas: float = 10.0
    fit_max_nfev: int = 2000
    fit_attempts: int = 3
    fit_jitter: float = 0.25


class LLGConfig(BaseModel):
    steps_per_period: int = 100
    min_steps_per_larmor: int = 50
    norm_defect_tolerance: float = 1.0e-6
    cone_floor_rad: float = 1.0e-9
    drift_tolerance: float = 0.01
    settle_fraction: float = 0.2


class OutputConfig(BaseModel):
    significant_digits: int = 17
    pgm_max_grey: int = 255


class Settings(BaseSettings):
    preset: PresetConfig = Field(default_factory=PresetConfig)
    numerics: NumericsConfig = Field(default_factory=NumericsConfig)
    llg: LLGConfig = Field(default_factory=LLGConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    # Worker processes for independent trajectories; env override only.
    workers: int = Field(1, ge=1)

    model_config = SettingsConfigDict(
        env_prefix="POLARITON_",
        env_file=".env",
        env_nested_delimiter="__",
        extra="ignore",
    )

    @classmethod
    def load_from_yaml(cls, yaml_path: Path) -> "Settings":
        if not yaml_path.exists():
            raise FileNotFoundError(f"Config file not found at {yaml_path}")

        with open(yaml_path, "r") as f:
            yaml_data = yaml.safe_load(f) or {}

        return cls(**yaml_data)


class ConfigManager:
    _instance = None
    _settings: Settings

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(ConfigManager, cls).__new__(cls)
            cls._instance._load_config()
        return cls._instance

    def _load_config(self):
        config_path = Path(__file__).parent / "settings.yaml"
        try:
            self._settings = Settings.load_from_yaml(config_path)
        except Exception as e:
            raise RuntimeError(f"Failed to load configuration: {e}")

    def reload(self) -> None:
        """Re-read settings.yaml and the environment (tests flip env vars)."""
        self._load_config()

    @property
    def settings(self) -> Settings:
        return self._settings

    def get(self, key: str, default=None) -> Any:
        """
        Dot notation access to config (e.g., 'numerics.pole_guard').
        """
        keys = key.split(".")
        value: Any = self._settings
        try:
            for k in keys:
                if isinstance(value, BaseModel):
                    value = getattr(value, k)
                elif isinstance(value, dict):
                    value = value[k]
                else:
                    return default
            return value
        except (AttributeError, KeyError):
            return default


# Global Accessor
config = ConfigManager()
