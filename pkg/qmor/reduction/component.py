"""
Per-state reduced component

Holds the spectral basis W (orthonormal Hermitian columns), its physical
counterpart iW, the EIM pair for g and h, and every grid-sized inner product
the online stage needs:

    A2 = W^H W            E1 = W^H R W (R = resonance factor, so cE1 = W^H A W)
    A1 = A2 + dt c E1     A3 = dt B5
    B1 = W^H A^2 W        B2 = W^H A W        B3 = W^H A G
    B4 = W^H W            B5 = W^H G          B6 = G^H G

where A is the linear multiplier and G holds the spectral images of the
g-EIM basis as columns. All products are real parts. Enrichment appends one
row and column per new basis vector, so each matrix for n vectors is the
leading block of the matrix for n + 1.
"""

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from qmor.errors import ComponentStateError, DegenerateStabilityError, InvalidArgumentError
from qmor.fom.seeds import seed_indices, seed_state
from qmor.fom.types import Mu, StateLabel, mu_key
from qmor.reduction.basis import DEPENDENCE_THRESHOLD, gram_schmidt
from qmor.reduction.eim import EimComponent
from qmor.spectral.field import FourierField
from qmor.spectral.grid import SpectralGrid
from qmor.spectral.transforms import (
    linear_multiplier, physical_from_coefficients, resonance_factor, spectral_from_values
)

logger = logging.getLogger(__name__)

# Matrices grown symmetrically with the basis: name -> diagonal weight
_SQUARE_WEIGHTS = ("A2", "E1", "B1", "B2")
MATRIX_NAMES = ("A1", "A2", "A3", "E1", "B1", "B2", "B3", "B4", "B5", "B6")


def eim_spectral_images(eim: EimComponent, grid: SpectralGrid) -> np.ndarray:
    """Spectral image of every EIM basis row, as columns (grid x M)"""
    return np.stack([spectral_from_values(row, grid) for row in eim.basis], axis=1)


class ReducedComponent:
    """Reduced space and offline matrices of one state"""

    def __init__(
        self,
        label: StateLabel,
        grid: SpectralGrid,
        eim_g: EimComponent,
        eim_h: EimComponent,
        c: float,
        dt: float,
        u0: float
    ):
        if eim_g.grid_size != grid.total_modes or eim_h.grid_size != grid.total_modes:
            raise InvalidArgumentError("EIM components were trained on a different grid")
        self.label = StateLabel(label)
        self.grid = grid
        self.eim_g = eim_g
        self.eim_h = eim_h
        self.c = float(c)
        self.q = grid.setup.q
        self.dt = float(dt)
        self.u0 = float(u0)

        self.W = np.zeros((grid.total_modes, 0), dtype=np.complex128)
        self.iW = np.zeros((grid.total_modes, 0))
        self.selected_params: List[Mu] = []
        self.pruned_params: List[Mu] = []
        self.history: List[Dict[str, float]] = []

        M = eim_g.size
        for name in ("A1", "A2", "E1", "B1", "B2", "B4"):
            setattr(self, name, np.zeros((0, 0)))
        self.A3 = np.zeros((0, M))
        self.B3 = np.zeros((0, M))
        self.B5 = np.zeros((0, M))
        self.point_g = np.zeros((M, 0))
        self.point_h = np.zeros((eim_h.size, 0))
        self.seed_coefficients = np.zeros(0)

        self.h_weights = eim_h.basis.mean(axis=1)
        self.multiplier_values = np.unique(linear_multiplier(grid, self.c, self.q))
        self._G: Optional[np.ndarray] = None
        self.B6 = np.zeros((M, M))
        self._support: Optional[Tuple[np.ndarray, np.ndarray]] = None

    def __repr__(self) -> str:
        return f"ReducedComponent({self.label.value}, N={self.size}, M={self.eim_g.size}, L={self.eim_h.size})"

    @property
    def size(self) -> int:
        return int(self.W.shape[1])

    @property
    def G(self) -> np.ndarray:
        if self._G is None:
            self._G = eim_spectral_images(self.eim_g, self.grid)
            self.B6 = np.real(self._G.conj().T @ self._G)
        return self._G

    def _weights(self) -> Dict[str, np.ndarray]:
        res = resonance_factor(self.grid, self.q).reshape(-1)
        A = self.c * res
        return {"A2": np.ones_like(res), "E1": res, "B1": A * A, "B2": A}

    def require_trained(self) -> None:
        if self.size == 0:
            raise ComponentStateError(f"{self.label.value} component has no basis vectors")

    def add_snapshot(self, field: FourierField, mu=None) -> bool:
        """
        Gram-Schmidt a converged branch into the basis and grow every matrix.
        Returns False (basis unchanged) for a dependent snapshot.
        """
        w, residual = gram_schmidt(self.W if self.size else None, field.flat, DEPENDENCE_THRESHOLD)
        if w is None:
            return False
        G = self.G
        weights = self._weights()
        for name in _SQUARE_WEIGHTS:
            Dw = weights[name] * w
            setattr(self, name, _grow(getattr(self, name), np.real(self.W.conj().T @ Dw), np.real(np.vdot(w, Dw))))
        self.B4 = self.A2.copy()
        self.A1 = self.A2 + self.dt * self.c * self.E1

        row_b5 = np.real(w.conj() @ G)
        row_b3 = np.real((w.conj() * weights["B2"]) @ G)
        self.B5 = np.vstack([self.B5, row_b5])
        self.B3 = np.vstack([self.B3, row_b3])
        self.A3 = self.dt * self.B5

        iw = physical_from_coefficients(w, self.grid)
        self.point_g = np.column_stack([self.point_g, iw[self.eim_g.points]])
        self.point_h = np.column_stack([self.point_h, iw[self.eim_h.points]])

        seed = seed_state(self.label, self.u0)
        seeded = seed_indices(self.grid, seed)
        self.seed_coefficients = np.append(self.seed_coefficients, seed.u0 * float(np.sum(np.real(w[seeded]))))

        self.W = np.column_stack([self.W, w])
        self.iW = np.column_stack([self.iW, iw])
        if mu is not None:
            self.selected_params.append(mu_key(mu))
        self._support = None
        logger.info(f"{self.label.value}: basis N={self.size} (orthogonal residual {residual:.3e})")
        return True

    def online_matrices(self, dt: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(A1, A2, A3) for a time step; rebuilt from E1 and B5 when dt differs"""
        self.require_trained()
        if dt is None or dt == self.dt:
            return self.A1, self.A2, self.A3
        return self.A2 + dt * self.c * self.E1, self.A2, dt * self.B5

    def stability_factor(self, epsilon: float) -> float:
        """min_H |A(H) - eps|, by bisection on the sorted multiplier values"""
        values = self.multiplier_values
        i = int(np.searchsorted(values, epsilon))
        candidates = values[max(0, i - 1):i + 1]
        beta = float(np.min(np.abs(candidates - epsilon)))
        if beta == 0.0:
            raise DegenerateStabilityError(f"eps={epsilon} coincides with a multiplier value")
        return beta

    def _support_order(self) -> Tuple[np.ndarray, np.ndarray]:
        if self._support is None:
            norms = np.linalg.norm(self.W, axis=1)
            order = np.argsort(-norms, kind="stable")
            self._support = (order, norms[order])
        return self._support

    def spectral_support(self, coefficients: np.ndarray, delta: float) -> np.ndarray:
        """
        Sorted indices H with |(W c)(H)| > delta. Only rows whose norm reaches
        delta / ||c|| are evaluated (Cauchy-Schwarz).
        """
        norm_c = float(np.linalg.norm(coefficients))
        if norm_c == 0.0:
            return np.zeros(0, dtype=np.int64)
        order, sorted_norms = self._support_order()
        k = int(np.searchsorted(-sorted_norms, -delta / norm_c, side="right"))
        rows = order[:k]
        magnitudes = np.abs(self.W[rows] @ coefficients)
        return np.sort(rows[magnitudes > delta])

    def phase_transitioned(self, coefficients: np.ndarray, delta: float) -> bool:
        """Reduced analogue of the PTI against the seed field"""
        if self.u0 > delta:
            seeded = seed_indices(self.grid, seed_state(self.label, self.u0))
        else:
            seeded = np.zeros(0, dtype=np.int64)
        return not np.array_equal(self.spectral_support(coefficients, delta), seeded)

    def truncate(self, n: int) -> "ReducedComponent":
        """Nested component on the first n basis vectors"""
        if not 1 <= n <= self.size:
            raise InvalidArgumentError(f"Cannot truncate an N={self.size} component to {n}")
        sub = ReducedComponent.__new__(ReducedComponent)
        sub.__dict__.update(self.__dict__)
        sub.W = self.W[:, :n]
        sub.iW = self.iW[:, :n]
        for name in ("A1", "A2", "E1", "B1", "B2", "B4"):
            setattr(sub, name, getattr(self, name)[:n, :n])
        for name in ("A3", "B3", "B5"):
            setattr(sub, name, getattr(self, name)[:n])
        sub.point_g = self.point_g[:, :n]
        sub.point_h = self.point_h[:, :n]
        sub.seed_coefficients = self.seed_coefficients[:n]
        sub.selected_params = list(self.selected_params[:n])
        sub.pruned_params = list(self.pruned_params)
        sub.history = [row for row in self.history if row.get("N", 0) <= n]
        sub._support = None
        return sub


def _grow(matrix: np.ndarray, column: np.ndarray, diagonal: float) -> np.ndarray:
    n = matrix.shape[0]
    grown = np.empty((n + 1, n + 1))
    grown[:n, :n] = matrix
    grown[:n, n] = column
    grown[n, :n] = column
    grown[n, n] = diagonal
    return grown


def assemble_matrices(component: ReducedComponent) -> Dict[str, np.ndarray]:
    """Every reduced matrix recomputed from W, iW and the EIM bases in one go"""
    W = component.W
    Wh = W.conj().T
    G = eim_spectral_images(component.eim_g, component.grid)
    res = resonance_factor(component.grid, component.q).reshape(-1)
    A = component.c * res
    A2 = np.real(Wh @ W)
    E1 = np.real(Wh @ (res[:, None] * W))
    B5 = np.real(Wh @ G)
    return {
        "A1": np.real(Wh @ ((1.0 + component.dt * A)[:, None] * W)),
        "A2": A2,
        "A3": component.dt * B5,
        "E1": E1,
        "B1": np.real(Wh @ ((A * A)[:, None] * W)),
        "B2": np.real(Wh @ (A[:, None] * W)),
        "B3": np.real(Wh @ (A[:, None] * G)),
        "B4": A2,
        "B5": B5,
        "B6": np.real(G.conj().T @ G),
        "point_g": component.iW[component.eim_g.points],
        "point_h": component.iW[component.eim_h.points],
    }
