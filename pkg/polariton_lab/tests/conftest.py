import math
import os
import sys

import pytest

# Add root to path so we can import lib, shared and config
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from config.manager import config
from lib.params import reference_preset
from shared.logger import setup_logging

setup_logging()


@pytest.fixture
def preset():
    """Reference SystemParams and the resonant drive it ships with."""
    params, drive = reference_preset()
    return params, drive


@pytest.fixture
def params(preset):
    return preset[0]


@pytest.fixture
def resonant_drive(preset):
    """delta = 0, +z bias tuned so omega_0 = omega_c."""
    return preset[1]


@pytest.fixture
def matched_drive(resonant_drive):
    """Right-circular drive at the centre: enhanced coupling for a +z bias."""
    return resonant_drive.replace(delta=1.0, phi=-math.pi / 2)


@pytest.fixture
def opposed_drive(resonant_drive):
    """Left-circular drive: coupling annihilated for a +z bias."""
    return resonant_drive.replace(delta=1.0, phi=math.pi / 2)


@pytest.fixture
def fresh_config(monkeypatch):
    """Config singleton that is re-read once the test's environment changes are undone."""
    yield config
    monkeypatch.undo()
    config.reload()
