"""Minimum-container loading of PCB components onto trolleys and stackers."""

from .core import (ComponentSpec, ContainerClass, Instance, LineConfig, PcbSpec, Solution,
                   Status, Subproblem, validate_instance, variable_count)
from .exact import SolverConfig, solve, solve_instance, sensitivity_sweep
from .heuristics import greedy_pack, lower_bound
from .oracle import brute_force_optimum, check_feasible

__version__ = "0.1.0"
