"""
Tests for spectra export, greymaps and ingestion.
"""

import math

import numpy as np
import pytest

from lib import spectra_io
from lib.params import MHZ
from lib.quantum_io import field_sweep_map
from shared.errors import ParseError, UnitError
from shared.models import ComplexSpectrum


@pytest.fixture
def small_map(params, matched_drive):
    fields = np.linspace(0.2295, 0.2305, 3)
    freqs = params.cavity.omega_c + np.linspace(-20, 20, 9) * MHZ
    return field_sweep_map(params, matched_drive, fields, freqs)


class TestExport:
    """Map and spectrum writers."""

    def test_header_declares_format_and_units(self, tmp_path, small_map):
        """Header names format, version, units and parameters."""
        path = spectra_io.write_spectral_map(tmp_path / "map.csv", small_map, {"recipe": "demo"})
        lines = path.read_text().splitlines()
        assert lines[0] == "# polariton_lab spectra"
        assert "# version: 1" in lines
        assert "# format: map" in lines
        assert "# frequency_unit: rad/s" in lines
        assert "# recipe: demo" in lines
        assert any(line.startswith("# sigma_convention:") for line in lines)
        assert any(line.startswith("# parameters:") for line in lines)

    def test_values_round_trip_exactly(self, tmp_path, small_map):
        """17 significant digits read back bit for bit."""
        path = spectra_io.write_spectral_map(tmp_path / "map.csv", small_map)
        columns = spectra_io.read_map_columns(path)
        assert columns["axis1"].size == 27
        assert np.array_equal(columns["mag"], small_map.magnitude.ravel())
        assert np.array_equal(columns["phase"], small_map.phase.ravel())
        assert np.array_equal(columns["axis2"][:9], small_map.axis2)

    def test_identical_inputs_identical_bytes(self, tmp_path, small_map):
        """Same map, same bytes."""
        a = spectra_io.write_spectral_map(tmp_path / "a.csv", small_map, {"recipe": "x"})
        b = spectra_io.write_spectral_map(tmp_path / "b.csv", small_map, {"recipe": "x"})
        assert a.read_bytes() == b.read_bytes()

    def test_pgm(self, tmp_path, small_map):
        """Greymap header and full 0 to 255 range."""
        path = spectra_io.write_pgm(tmp_path / "map.pgm", small_map)
        lines = path.read_text().splitlines()
        assert lines[0] == "P2"
        assert lines[2] == "9 3"
        assert lines[3] == "255"
        grey = [int(v) for row in lines[4:] for v in row.split()]
        assert len(grey) == 27
        assert min(grey) == 0 and max(grey) == 255

    def test_table(self, tmp_path):
        """Tables carry their column names."""
        path = spectra_io.write_table(tmp_path / "t.csv", ["phi", "cone"], [[0.5, 0.25], [1.0, 0.125]])
        lines = path.read_text().splitlines()
        assert "# columns: phi,cone" in lines
        assert lines[-1] == "1,0.125"


class TestIngest:
    """Reading measured and exported spectra."""

    def test_polar_in_mhz(self, tmp_path):
        """Polar rows in MHz are sorted and converted."""
        path = tmp_path / "cavity.csv"
        path.write_text(
            "# frequency_unit: MHz\n"
            "frequency,mag,phase\n"
            "6441.0,0.9,0.1\n"
            "6439.0,0.8,-0.2\n"
            "6440.0,0.1,0.0\n"
        )
        (spectrum,) = spectra_io.ingest_spectra(path, "polar")
        assert np.allclose(spectrum.freq_grid / MHZ, [6439.0, 6440.0, 6441.0])
        assert spectrum.magnitude[0] == pytest.approx(0.8)
        assert spectrum.phase[0] == pytest.approx(-0.2)

    def test_complex_in_ghz(self, tmp_path):
        """Complex rows in GHz are converted to rad/s."""
        path = tmp_path / "c.csv"
        path.write_text("# frequency_unit: GHz\n6.0,0.0,1.0\n6.1,1.0,0.0\n")
        (spectrum,) = spectra_io.ingest_spectra(path, "complex")
        assert spectrum.freq_grid[0] == pytest.approx(2 * math.pi * 6.0e9)
        assert spectrum.s11[0] == pytest.approx(1j)

    def test_exported_map_ingests_row_by_row(self, tmp_path, small_map):
        """An exported map comes back one spectrum per row."""
        path = spectra_io.write_spectral_map(tmp_path / "map.csv", small_map)
        spectra = spectra_io.ingest_spectra(path, "map")
        assert len(spectra) == 3
        assert spectra[1].metadata["axis1"] == pytest.approx(small_map.axis1[1])
        assert np.allclose(spectra[1].s11, small_map.values[1], rtol=1e-14, atol=1e-15)

    def test_spectrum_writer_reads_back(self, tmp_path):
        """Written spectra ingest unchanged."""
        omega = np.linspace(1.0, 2.0, 5) * 2 * math.pi * 1e9
        spectrum = ComplexSpectrum(freq_grid=omega, s11=np.exp(1j * np.linspace(0, 1, 5)))
        path = spectra_io.write_spectrum(tmp_path / "s.csv", spectrum, fmt="complex", frequency_unit="GHz")
        (back,) = spectra_io.ingest_spectra(path, "complex")
        assert np.allclose(back.freq_grid, omega, rtol=1e-14)
        assert np.allclose(back.s11, spectrum.s11)

    def test_missing_unit(self, tmp_path):
        """A file without a frequency unit is refused."""
        path = tmp_path / "nounit.csv"
        path.write_text("6.0,0.5,0.0\n")
        with pytest.raises(UnitError):
            spectra_io.ingest_spectra(path, "polar")

    def test_unknown_unit(self, tmp_path):
        """Unknown frequency units are refused."""
        path = tmp_path / "badunit.csv"
        path.write_text("# frequency_unit: furlongs\n6.0,0.5,0.0\n")
        with pytest.raises(UnitError):
            spectra_io.ingest_spectra(path, "polar")

    def test_bad_row_reports_line(self, tmp_path):
        """A malformed row is reported with its line number."""
        path = tmp_path / "bad.csv"
        path.write_text("# frequency_unit: Hz\n1.0,0.5,0.0\n2.0,abc,0.0\n")
        with pytest.raises(ParseError) as excinfo:
            spectra_io.ingest_spectra(path, "polar")
        assert excinfo.value.line == 3
        assert ":3:" in str(excinfo.value)

    def test_wrong_column_count(self, tmp_path):
        """Rows with the wrong column count are reported."""
        path = tmp_path / "cols.csv"
        path.write_text("# frequency_unit: Hz\n1.0,0.5\n")
        with pytest.raises(ParseError) as excinfo:
            spectra_io.ingest_spectra(path, "polar")
        assert excinfo.value.line == 2

    def test_missing_file(self, tmp_path):
        """An absent file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            spectra_io.ingest_spectra(tmp_path / "absent.csv")
