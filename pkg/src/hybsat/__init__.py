"""Continuous local search for hybrid Boolean constraints on shared BDDs.

The pipeline: parse or generate a hybrid formula (clauses, XOR, NAE,
cardinality, pseudo-Boolean), compile every constraint into one shared
multi-rooted BDD, then maximize the expected satisfied weight over the
cube [-1,1]^n with an exact gradient obtained by two message-passing
sweeps.  Verified discrete solutions come from rounding local optima;
adaptive constraint reweighting steers successive ascents.
"""

__version__ = "0.1.0"

from .bdd import BddManager, BddStats, MrBdd, build_formula, eval_vertex, stats
from .engine import (MessageBuffers, bottom_up, brute_cop, cop,
                     discrete_gradient, top_down, value_and_gradient,
                     wf_coefficient, wfe_eval)
from .formula import (Constraint, Formula, Kind, Literal, ParseError,
                      WeightMap, as_assignment, check_constraint,
                      check_formula, constraint_length, parse_dimacs_cnf,
                      parse_hybrid, parse_wcnf, to_hbf)
from .optimizer import OptimizerConfig, TrialResult, ascend, project_box
from .solver import (SolverConfig, Solution, incomplete_score, init_weights,
                     reweight, round_randomized, round_sign, solve_maxsat,
                     solve_sat)

__all__ = [
    "BddManager", "BddStats", "Constraint", "Formula", "Kind", "Literal",
    "MessageBuffers", "MrBdd", "OptimizerConfig", "ParseError", "Solution",
    "SolverConfig", "TrialResult", "WeightMap", "as_assignment", "ascend",
    "bottom_up", "brute_cop", "build_formula", "check_constraint",
    "check_formula", "constraint_length", "cop", "discrete_gradient",
    "eval_vertex", "incomplete_score", "init_weights", "parse_dimacs_cnf",
    "parse_hybrid", "parse_wcnf", "project_box", "reweight",
    "round_randomized", "round_sign", "solve_maxsat", "solve_sat", "stats",
    "to_hbf", "top_down", "value_and_gradient", "wf_coefficient", "wfe_eval",
]
