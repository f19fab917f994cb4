"""Numerical lab for the derivative nonlinear Schrodinger equation.

Gauge transforms, ground state, conserved and virial functionals, solvers on
the periodic line and the Dirichlet half-line, modulation fits, and scripted
experiments with pass/fail verdicts.
"""

__version__ = "0.1.0"

from .grid import ComplexField, GridKind, GridSpec  # noqa: E402
from .ground_state import ground_state  # noqa: E402
from .gauge import gauge_transform  # noqa: E402
from .evolve import Equation, EvolutionProblem, Status, evolve  # noqa: E402
from .experiments import ExperimentConfig, ExperimentName, Verdict, run_experiment  # noqa: E402

__all__ = [
    "ComplexField",
    "Equation",
    "EvolutionProblem",
    "ExperimentConfig",
    "ExperimentName",
    "GridKind",
    "GridSpec",
    "Status",
    "Verdict",
    "evolve",
    "gauge_transform",
    "ground_state",
    "run_experiment",
]
