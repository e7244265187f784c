"""Full-order LP model - seeds, time stepping, phase-steady solution sets"""

from qmor.fom.types import (
    StateLabel, STATE_ORDER, BranchOutcome, Mu, mu_key, ModelParameters,
    SolverConfig, SeedState, Branch, PhaseSteadySolutionSet
)
from qmor.fom.seeds import prominent_modes, seed_state, seed_field, seed_indices
from qmor.fom.solver import (
    FullOrderSolver, step, free_energy, phase_transition_indicator,
    steady_state_residual, nonlinear_force, energy_density
)
from qmor.fom.pool import SnapshotPool, save_solution_set, load_branch

__all__ = [
    "StateLabel", "STATE_ORDER", "BranchOutcome", "Mu", "mu_key", "ModelParameters",
    "SolverConfig", "SeedState", "Branch", "PhaseSteadySolutionSet",
    "prominent_modes", "seed_state", "seed_field", "seed_indices",
    "FullOrderSolver", "step", "free_energy", "phase_transition_indicator",
    "steady_state_residual", "nonlinear_force", "energy_density",
    "SnapshotPool", "save_solution_set", "load_branch",
]
