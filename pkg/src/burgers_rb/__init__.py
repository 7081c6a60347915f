"""Certified reduced-basis solver for the parametrized 1D viscous Burgers equation."""
from .config import ProblemConfig, load_config, parse_config
from .errors import BurgersRBError
from .full import FullModel, solve_full
from .offline import ReducedModel, build_reduced_model
from .online import solve_reduced
from .certify import certify_trajectory
from .params import FrequencyStructure, ParameterRanges, make_parameter_point, sample_parameters

__all__ = [
    "BurgersRBError", "FrequencyStructure", "FullModel", "ParameterRanges", "ProblemConfig",
    "ReducedModel", "build_reduced_model", "certify_trajectory", "load_config",
    "make_parameter_point", "parse_config", "sample_parameters", "solve_full", "solve_reduced",
]
