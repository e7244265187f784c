"""
Shared fixtures: small lattices and an exactly solvable lamellar component.

A lamella phi = 2a cos(x2) lives on the modes (0, +-1, 0, 0), where the
linear multiplier vanishes. Its one-mode Galerkin steady state is
a^2 = eps / 3 with free energy -eps^2 / 6, and the g and h snapshots of the
family span two-dimensional spaces, so M = L = 2 EIM is exact.
"""

import numpy as np
import pytest

from qmor.fom.types import StateLabel
from qmor.reduction.component import ReducedComponent
from qmor.reduction.eim import EimTarget, evaluate_target, train_eim
from qmor.spectral.field import FourierField
from qmor.spectral.geometry import ProjectionSetup
from qmor.spectral.grid import SpectralGrid
from qmor.spectral.transforms import to_physical

LAMELLAR_MODES = ((0, 1, 0, 0), (0, -1, 0, 0))
LAMELLAR_SNAPSHOTS = [(0.05, 0.0), (0.1, 0.5), (0.15, 1.0), (0.2, 0.25)]


def lamellar_field(grid: SpectralGrid, a: float) -> FourierField:
    field = FourierField.zeros(grid)
    for h in LAMELLAR_MODES:
        field.flat[grid.flat_index(h)] = a
    return field


def lamellar_amplitude(eps: float) -> float:
    return float(np.sqrt(eps / 3.0))


def build_lamellar_component(grid: SpectralGrid) -> ReducedComponent:
    g_snaps, h_snaps = [], []
    for a, alpha in LAMELLAR_SNAPSHOTS:
        phi = to_physical(lamellar_field(grid, a)).flat
        mu = (3.0 * a * a, alpha)
        g_snaps.append((mu, evaluate_target(EimTarget.G, phi, alpha)))
        h_snaps.append((mu, evaluate_target(EimTarget.H, phi, alpha)))
    eim_g = train_eim(EimTarget.G, StateLabel.LAM, g_snaps, 4)
    eim_h = train_eim(EimTarget.H, StateLabel.LAM, h_snaps, 4)
    comp = ReducedComponent(StateLabel.LAM, grid, eim_g, eim_h, c=50.0, dt=0.1, u0=0.3)
    comp.add_snapshot(lamellar_field(grid, 0.1), (0.03, 0.5))
    return comp


@pytest.fixture
def grid4():
    return SpectralGrid(ProjectionSetup(), 4)


@pytest.fixture
def grid8():
    return SpectralGrid(ProjectionSetup(), 8)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def lamellar_component(grid8):
    return build_lamellar_component(grid8)
