"""Finite-domain LCG solver whose resolution language can be extended with
partial-sum, comparison, precedence and tuple literals."""

from .model import ModelInstance, load_model, normalize, parse_model
from .search import SolveResult, Solver, SolverConfig, solve

__all__ = [
    "ModelInstance", "SolveResult", "Solver", "SolverConfig",
    "load_model", "normalize", "parse_model", "solve",
]
