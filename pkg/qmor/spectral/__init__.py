"""Spectral core - projection geometry, 4D lattice, transforms"""

from qmor.spectral.geometry import ProjectionSetup, TWELVE_FOLD_Q
from qmor.spectral.grid import SpectralGrid, build_grid
from qmor.spectral.field import FourierField, PhysicalField, save_field, load_field
from qmor.spectral.transforms import (
    to_physical, to_spectral, linear_multiplier, resonance_factor,
    evaluate_quasiperiodic, hermitian_part, reflect
)

__all__ = [
    "ProjectionSetup", "TWELVE_FOLD_Q", "SpectralGrid", "build_grid",
    "FourierField", "PhysicalField", "save_field", "load_field",
    "to_physical", "to_spectral", "linear_multiplier", "resonance_factor",
    "evaluate_quasiperiodic", "hermitian_part", "reflect",
]
