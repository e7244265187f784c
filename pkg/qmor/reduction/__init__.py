"""Multi-component multi-state reduced basis - EIM, reduced components, greedy training"""

from qmor.reduction.eim import EimComponent, EimTarget, train_eim, evaluate_target
from qmor.reduction.basis import gram_schmidt, orthonormality_defect
from qmor.reduction.component import ReducedComponent, assemble_matrices, MATRIX_NAMES
from qmor.reduction.online import (
    OnlineSolution, online_solve, error_indicator, reduced_energy, reconstruct,
    residual_norm, relative_error
)
from qmor.reduction.greedy import (
    fill_pool, eim_snapshots, train_component_eims, greedy_offline, evaluate_testing_errors
)
from qmor.reduction.store import (
    save_component, load_component, save_eim, load_eim, component_dir, trained_labels
)

__all__ = [
    "EimComponent", "EimTarget", "train_eim", "evaluate_target",
    "gram_schmidt", "orthonormality_defect",
    "ReducedComponent", "assemble_matrices", "MATRIX_NAMES",
    "OnlineSolution", "online_solve", "error_indicator", "reduced_energy", "reconstruct",
    "residual_norm", "relative_error",
    "fill_pool", "eim_snapshots", "train_component_eims", "greedy_offline", "evaluate_testing_errors",
    "save_component", "load_component", "save_eim", "load_eim", "component_dir", "trained_labels",
]
