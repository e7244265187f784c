"""
Projection-method geometry for 12-fold quasicrystals

A 2D quasiperiodic field is the restriction of a 4D periodic one. The
projection matrix S maps integer reciprocal vectors H of the lifted lattice
to physical wave vectors S·H.
"""

import math
from dataclasses import dataclass

import numpy as np

TWELVE_FOLD_Q = 2.0 * math.cos(math.pi / 12.0)


@dataclass(frozen=True)
class ProjectionSetup:
    """Physical dimension d=2 lifted to n=4, second length scale q"""
    d: int = 2
    n: int = 4
    q: float = TWELVE_FOLD_Q

    @property
    def projection(self) -> np.ndarray:
        """S, shape (d, n)"""
        return np.array([
            [1.0, math.cos(math.pi / 6.0), math.cos(math.pi / 3.0), 0.0],
            [0.0, math.sin(math.pi / 6.0), math.sin(math.pi / 3.0), 1.0],
        ])

    @property
    def primitive_vectors(self) -> np.ndarray:
        """p*_i = S·e_i as rows, shape (n, d)"""
        return self.projection.T.copy()

    def wave_vector(self, h) -> np.ndarray:
        return self.projection @ np.asarray(h, dtype=float)

    def k_squared(self, h) -> float:
        g = self.wave_vector(h)
        return float(g @ g)
