"""
Tests for the settings layer and the structured log renderer.
"""

import pytest

from config.manager import ConfigManager, Settings, config
from shared import logger as log_module


class TestConfigManager:
    """Dotted access to settings.yaml plus environment overrides."""

    def test_singleton(self):
        """One shared manager."""
        assert ConfigManager() is config

    def test_dotted_get(self):
        """Nested keys resolve through dots."""
        assert config.get("numerics.pole_guard") == pytest.approx(1e-6)
        assert config.get("llg.steps_per_period") == 100
        assert config.get("output.significant_digits") == 17

    def test_missing_key_returns_default(self):
        """Unknown keys fall back to the default."""
        assert config.get("numerics.does_not_exist", 42) == 42
        assert config.get("nowhere.at.all") is None

    def test_yaml_overrides_model_defaults(self):
        """Preset values come from settings.yaml."""
        assert config.settings.preset.rho_per_m3 == pytest.approx(4.22e27)
        assert isinstance(config.settings.preset.rho_per_m3, float)

    def test_workers_default(self):
        """Serial by default."""
        assert config.get("workers") == 1

    def test_workers_from_environment(self, fresh_config, monkeypatch):
        """POLARITON_WORKERS overrides the file."""
        monkeypatch.setenv("POLARITON_WORKERS", "3")
        fresh_config.reload()
        assert fresh_config.get("workers") == 3

    def test_missing_yaml_raises(self, tmp_path):
        """An absent settings file is an error."""
        with pytest.raises(FileNotFoundError):
            Settings.load_from_yaml(tmp_path / "absent.yaml")

    def test_empty_yaml_gives_defaults(self, tmp_path):
        """An empty file keeps the model defaults."""
        path = tmp_path / "settings.yaml"
        path.write_text("")
        settings = Settings.load_from_yaml(path)
        assert settings.numerics.quadrature_order == 32


class TestLogRenderer:
    """Table and pretty renderers used by every module's logger."""

    def test_known_event_gets_label(self, monkeypatch):
        """Known events render with their label and details."""
        monkeypatch.setenv("LOG_FORMAT", "pretty")
        text = log_module._render_event(None, None, {"event": "run_complete", "level": "info", "sweep": "fit"})
        assert "Run Complete" in text
        assert "sweep=fit" in text

    def test_domain_keys_come_first(self):
        """Domain keys lead, the rest follow sorted."""
        details = log_module._ordered_details({"zeta": 1, "points": 5, "sweep": "fit"})
        assert details == "sweep=fit | points=5 | zeta=1"

    def test_unknown_event_title_cased(self, monkeypatch):
        """Unlabelled events are title-cased."""
        monkeypatch.setenv("LOG_FORMAT", "table")
        text = log_module._render_event(None, None, {"event": "field_sweep_built", "level": "debug"})
        assert "Field Sweep Built" in text
