import pytest

from burgers_rb.config import dump_config, load_config, parse_config
from burgers_rb.errors import ConfigError

from conftest import config_path

MINIMAL = """
[problem]
num_intervals = 10
dt = 0.1
horizon = 1

[ranges]
nu = [1, 1]
f_m = [0, 0]
u0m = [0, 1]
"""


def test_high_viscosity_round_trip():
    config = load_config(config_path("high_viscosity"))
    assert config.num_intervals == 40
    assert config.dt == 0.02 and config.horizon == 2
    assert config.num_steps == 100
    assert config.ranges.nu == (1.0, 1.0)
    assert config.penalty == 1e7
    again = parse_config(dump_config(config))
    assert again == config


def test_minimal_defaults():
    config = parse_config(MINIMAL)
    assert config.newton_tol == 3e-16 and config.newton_cap == 50
    assert config.freq.num_free == 3


@pytest.mark.parametrize("name", ["high_viscosity", "low_viscosity", "full_box", "benchmark1", "benchmark2"])
def test_shipped_configs_load(name):
    load_config(config_path(name))


def test_missing_key_is_named():
    with pytest.raises(ConfigError, match="problem.dt"):
        parse_config(MINIMAL.replace("dt = 0.1\n", ""))


def test_nonpositive_dt():
    with pytest.raises(ConfigError, match="dt"):
        parse_config(MINIMAL.replace("dt = 0.1", "dt = 0"))


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="problem.bogus"):
        parse_config(MINIMAL.replace("horizon = 1", "horizon = 1\nbogus = 3"))


def test_unknown_section_rejected():
    with pytest.raises(ConfigError, match="extra"):
        parse_config(MINIMAL + "\n[extra]\na = 1\n")


def test_non_integral_step_count():
    with pytest.raises(ConfigError, match="integer"):
        parse_config(MINIMAL.replace("dt = 0.1", "dt = 0.3"))


def test_structure_mismatch():
    with pytest.raises(ConfigError):
        parse_config(MINIMAL.replace("horizon = 1", "horizon = 1\nomega_u0 = [3]"))


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/config.ini")
