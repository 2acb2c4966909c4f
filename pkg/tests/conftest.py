import logging
from pathlib import Path

import numpy as np
import pytest

from isoq.bargmann import make_bs_circle, snap_radius
from isoq.config import load_config

REPO_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def config():
    """Repository config: defaults, default.yaml and the scenario presets"""
    return load_config(REPO_ROOT / "config")


@pytest.fixture
def bare_config(tmp_path):
    """Defaults only"""
    return load_config(tmp_path)


@pytest.fixture
def unit_circle_20():
    r = snap_radius(1.0, 20)
    return make_bs_circle(r, 20)


@pytest.fixture(autouse=True)
def _quiet_logs(caplog):
    caplog.set_level(logging.WARNING)
