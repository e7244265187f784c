"""
Prominent reciprocal vectors of the five candidate states

The 24 lifted vectors of the 12-fold star: twelve with |S·H| = 1 and twelve
with |S·H| = q. Each state seeds a subset of them with amplitude u0.
"""

from typing import Dict, FrozenSet, Tuple

import numpy as np

from qmor.errors import InvalidArgumentError
from qmor.fom.types import SeedState, StateLabel
from qmor.spectral.field import FourierField
from qmor.spectral.grid import SpectralGrid

Mode = Tuple[int, int, int, int]

_QC, _C6, _LQ, _T6, _LAM = (
    StateLabel.QC, StateLabel.C6, StateLabel.LQ, StateLabel.T6, StateLabel.LAM
)

# Unit shell, |S·H| = 1
UNIT_SHELL: Dict[Mode, FrozenSet[StateLabel]] = {
    (0, 1, 0, 0): frozenset({_QC, _LAM, _LQ}),
    (0, -1, 0, 0): frozenset({_QC, _LAM, _LQ}),
    (0, 0, 1, 0): frozenset({_QC, _LQ, _C6, _T6}),
    (0, 0, -1, 0): frozenset({_QC, _LQ, _C6, _T6}),
    (0, 0, 0, 1): frozenset({_QC, _T6}),
    (0, 0, 0, -1): frozenset({_QC, _T6}),
    (-1, 0, 1, 0): frozenset({_QC, _LQ, _C6}),
    (1, 0, -1, 0): frozenset({_QC, _LQ, _C6}),
    (0, -1, 0, 1): frozenset({_QC}),
    (0, 1, 0, -1): frozenset({_QC}),
    (-1, 0, 0, 0): frozenset({_QC, _LQ, _C6}),
    (1, 0, 0, 0): frozenset({_QC, _LQ, _C6}),
}

# Second shell, |S·H| = q
Q_SHELL: Dict[Mode, FrozenSet[StateLabel]] = {
    (1, 1, 0, 0): frozenset({_QC, _LQ}),
    (-1, -1, 0, 0): frozenset({_QC, _LQ}),
    (0, 1, 1, 0): frozenset({_QC, _T6}),
    (0, -1, -1, 0): frozenset({_QC, _T6}),
    (0, 0, 1, 1): frozenset({_QC}),
    (0, 0, -1, -1): frozenset({_QC}),
    (-1, 0, 1, 1): frozenset({_QC}),
    (1, 0, -1, -1): frozenset({_QC}),
    (-1, -1, 1, 1): frozenset({_QC}),
    (1, 1, -1, -1): frozenset({_QC}),
    (-1, -1, 0, 1): frozenset({_QC, _LQ}),
    (1, 1, 0, -1): frozenset({_QC, _LQ}),
}

EXPECTED_SIZES = {_QC: 24, _C6: 6, _LQ: 12, _T6: 6, _LAM: 2}


def prominent_modes(label: StateLabel) -> Tuple[Mode, ...]:
    """The prominent vectors of a state, unit shell first"""
    label = StateLabel(label)
    return tuple(
        h for shell in (UNIT_SHELL, Q_SHELL) for h, owners in shell.items() if label in owners
    )


def seed_state(label: StateLabel, u0: float) -> SeedState:
    return SeedState(label=StateLabel(label), modes=prominent_modes(label), u0=float(u0))


def seed_field(grid: SpectralGrid, seed: SeedState) -> FourierField:
    """phihat = u0 on the seed's prominent modes, zero elsewhere"""
    field = FourierField.zeros(grid)
    flat = field.flat
    for h in seed.modes:
        if not grid.contains(h):
            raise InvalidArgumentError(f"Seed mode {h} of {seed.label.value} not representable on N_H={grid.n_h}")
        flat[grid.flat_index(h)] = seed.u0
    return field


def seed_indices(grid: SpectralGrid, seed: SeedState) -> np.ndarray:
    """Sorted flat indices of the seed's prominent modes"""
    return np.sort(np.array([grid.flat_index(h) for h in seed.modes], dtype=np.int64))
