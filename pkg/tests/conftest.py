from pathlib import Path

import numpy as np
import pytest

from burgers_rb.config import load_config
from burgers_rb.full import FullModel
from burgers_rb.offline import build_reduced_model
from burgers_rb.params import make_parameter_point

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"

# acceptance criterion number -> (title, passed, detail); printed in the terminal summary
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {num:2d}. {title}: {detail}")


def config_path(name):
    return CONFIG_DIR / f"{name}.ini"


@pytest.fixture(scope="session")
def box_config():
    """Full parameter box on the coarse grid, POD with S=10 and N=5."""
    return load_config(config_path("full_box")).replace(num_intervals=40, rb={"snapshots": 10})


@pytest.fixture(scope="session")
def box_full(box_config):
    return FullModel(box_config)


@pytest.fixture(scope="session")
def box_model(box_config, box_full):
    return build_reduced_model(box_config, full_model=box_full)


@pytest.fixture(scope="session")
def reference_point(box_config):
    return make_parameter_point([1, 1, 1, 1, 1, 1, 2], box_config.freq, box_config.ranges)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
