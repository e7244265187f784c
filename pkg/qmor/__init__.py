"""
qmor - Reduced basis phase diagrams for 12-fold quasicrystals

Full-order spectral solver for the Lifshitz-Petrich model, multi-state
reduced basis training with empirical interpolation, and adaptive
phase-diagram generation.
"""

__version__ = "0.1.0"
__license__ = "Apache 2.0"

from qmor.config import WorkbenchConfig, load_config
from qmor.fom.solver import FullOrderSolver
from qmor.reduction.component import ReducedComponent
from qmor.diagram.classify import PhaseClassifier
from qmor.workbench import Workbench

__all__ = [
    "WorkbenchConfig",
    "load_config",
    "FullOrderSolver",
    "ReducedComponent",
    "PhaseClassifier",
    "Workbench",
]
