"""Computable rates for the Halpern proximal point algorithm, with checks.

Submodules: ``operators`` (resolvent catalog), ``iteration`` (trajectories and
boundedness constants), ``rates`` and ``xnat`` (natural-number functions and
huge-value arithmetic), ``bounds`` (rate functionals), ``verify`` (empirical
checks) and ``cli``.
"""
from .errors import (
    BudgetExceeded, DimensionMismatch, HorizonExhausted, InvalidScenario, MetastabError,
    NonFiniteNumeric, UnsupportedGrowth, WitnessInvalid,
)
from .iteration import Scenario, Trajectory, constants, run
from .scenario_io import load_scenario, scenario_from_dict
from .xnat import Exact, Tower, XNat

__all__ = [
    "BudgetExceeded", "DimensionMismatch", "HorizonExhausted", "InvalidScenario", "MetastabError",
    "NonFiniteNumeric", "UnsupportedGrowth", "WitnessInvalid", "Scenario", "Trajectory",
    "constants", "run", "load_scenario", "scenario_from_dict", "Exact", "Tower", "XNat",
]
