"""Problem configuration and its sectioned key/value file format.

Example::

    [problem]
    num_intervals = 40
    dt = 0.02
    horizon = 2
    omega_b0 = [1]

    [ranges]
    nu = [1, 1]
    amp_b0 = [[1, 1]]

List values are JSON. Sections ``rb`` and ``scm`` are optional.
"""
from __future__ import annotations

import configparser
import json
from dataclasses import asdict, dataclass, field

from .errors import ConfigError
from .params import FrequencyStructure, ParameterRanges


@dataclass(frozen=True)
class RBSettings:
    basis: str = "pod"
    size: int = 5
    enrich: bool = False
    snapshots: int = 10
    greedy_candidates: int = 100


@dataclass(frozen=True)
class SCMSettings:
    nearest: int = 10
    max_constraints: int = 10
    tolerance: float = 1e-3
    candidate_params: int = 20
    candidate_steps: int = 0  # 0 keeps every time step of each candidate trajectory


@dataclass(frozen=True)
class ProblemConfig:
    num_intervals: int
    dt: float
    horizon: float
    freq: FrequencyStructure
    ranges: ParameterRanges
    penalty: float = 1e7
    newton_tol: float = 3e-16
    newton_cap: int = 50
    seed: int = 0
    rb: RBSettings = field(default_factory=RBSettings)
    scm: SCMSettings = field(default_factory=SCMSettings)

    def __post_init__(self):
        if self.num_intervals < 2:
            raise ConfigError("problem.num_intervals must be >= 2")
        if not self.dt > 0:
            raise ConfigError("problem.dt must be positive")
        if not self.horizon > 0:
            raise ConfigError("problem.horizon must be positive")
        if not self.penalty > 0:
            raise ConfigError("problem.penalty must be positive")
        if not self.newton_tol > 0 or self.newton_cap < 1:
            raise ConfigError("problem.newton_tol and problem.newton_cap must be positive")
        steps = self.horizon / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps) or round(steps) < 1:
            raise ConfigError(f"horizon / dt = {steps} is not a positive integer")
        if self.ranges.nu[0] <= 0:
            raise ConfigError("ranges.nu must be positive")
        if self.rb.basis not in ("pod", "greedy"):
            raise ConfigError(f"rb.basis must be pod or greedy, got {self.rb.basis!r}")
        try:
            self.ranges.check_structure(self.freq)
        except Exception as exc:
            raise ConfigError(str(exc)) from None

    @property
    def num_steps(self):
        return int(round(self.horizon / self.dt))

    def times(self):
        return [k * self.dt for k in range(self.num_steps + 1)]

    def replace(self, **changes):
        data = {f: getattr(self, f) for f in self.__dataclass_fields__}
        for key, value in changes.items():
            if key in ("rb", "scm") and isinstance(value, dict):
                value = type(data[key])(**{**asdict(data[key]), **value})
            data[key] = value
        return ProblemConfig(**data)

    def to_dict(self):
        return {
            "problem": {
                "num_intervals": self.num_intervals, "dt": self.dt, "horizon": self.horizon,
                "penalty": self.penalty, "newton_tol": self.newton_tol,
                "newton_cap": self.newton_cap, "seed": self.seed, **self.freq.to_dict(),
            },
            "ranges": {
                "nu": list(self.ranges.nu), "f_m": list(self.ranges.f_m), "u0m": list(self.ranges.u0m),
                "amp_b0": [list(p) for p in self.ranges.amp_b0],
                "amp_b1": [list(p) for p in self.ranges.amp_b1],
                "amp_f": [[list(p) for p in row] for row in self.ranges.amp_f],
                "amp_u0": [list(p) for p in self.ranges.amp_u0],
            },
            "rb": asdict(self.rb),
            "scm": asdict(self.scm),
        }


_PROBLEM_KEYS = {
    "num_intervals": int, "dt": float, "horizon": float, "penalty": float,
    "newton_tol": float, "newton_cap": int, "seed": int,
    "omega_b0": list, "omega_b1": list, "omega_u0": list, "omega_fT": list, "omega_fS": list,
}
_PROBLEM_REQUIRED = ("num_intervals", "dt", "horizon")
_RANGE_KEYS = ("nu", "f_m", "u0m", "amp_b0", "amp_b1", "amp_f", "amp_u0")
_RANGE_REQUIRED = ("nu", "f_m", "u0m")
_RB_KEYS = {"basis": str, "size": int, "enrich": bool, "snapshots": int, "greedy_candidates": int}
_SCM_KEYS = {"nearest": int, "max_constraints": int, "tolerance": float,
             "candidate_params": int, "candidate_steps": int}


def _convert(section, key, raw, kind):
    try:
        if kind is str:
            return raw.strip().strip('"')
        value = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r}") from exc
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{section}.{key}: expected true/false")
        return value
    if kind is list:
        if not isinstance(value, list):
            raise ConfigError(f"{section}.{key}: expected a list")
        return value
    if kind is int and not (isinstance(value, int) and not isinstance(value, bool)):
        raise ConfigError(f"{section}.{key}: expected an integer")
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{section}.{key}: expected a number")
    return kind(value)


def _read_section(parser, name, keys, required=()):
    if not parser.has_section(name):
        if required:
            raise ConfigError(f"missing section [{name}]")
        return {}
    items = dict(parser.items(name))
    unknown = sorted(set(items) - set(keys))
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {', '.join(name + '.' + k for k in unknown)}")
    missing = [k for k in required if k not in items]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(name + '.' + k for k in missing)}")
    return {k: _convert(name, k, v, keys[k]) for k, v in items.items()}


def parse_config(text):
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case sensitive (omega_fT)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    unknown = sorted(set(parser.sections()) - {"problem", "ranges", "rb", "scm"})
    if unknown:
        raise ConfigError(f"unknown sections: {', '.join(unknown)}")
    problem = _read_section(parser, "problem", _PROBLEM_KEYS, _PROBLEM_REQUIRED)
    ranges = _read_section(parser, "ranges", dict.fromkeys(_RANGE_KEYS, list), _RANGE_REQUIRED)
    rb = _read_section(parser, "rb", _RB_KEYS)
    scm = _read_section(parser, "scm", _SCM_KEYS)
    freq = FrequencyStructure(**{k: problem.pop(k) for k in list(problem) if k.startswith("omega_")})
    try:
        ranges = ParameterRanges(**ranges)
        return ProblemConfig(freq=freq, ranges=ranges, rb=RBSettings(**rb), scm=SCMSettings(**scm), **problem)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def dump_config(config):
    lines = []
    for section, values in config.to_dict().items():
        lines.append(f"[{section}]")
        for key, value in values.items():
            lines.append(f"{key} = {value if isinstance(value, str) else json.dumps(value)}")
        lines.append("")
    return "\n".join(lines)
