"""
Discrete 4D reciprocal lattice

Coefficients are held as (N_H, N_H, N_H, N_H) arrays in numpy FFT order:
axis position i carries frequency i for i < N_H/2 and i - N_H otherwise,
so every H lies in [-N_H/2, N_H/2)^4. The flat index is the row-major
position of that array.
"""

from typing import Sequence, Tuple

import numpy as np

from qmor.errors import InvalidArgumentError
from qmor.spectral.geometry import ProjectionSetup


class SpectralGrid:
    """Immutable lattice of N_H^4 modes with per-mode |S·H|^2"""

    def __init__(self, setup: ProjectionSetup, n_h: int):
        if int(n_h) != n_h or n_h < 4 or n_h % 2:
            raise InvalidArgumentError(f"N_H must be an even integer >= 4, got {n_h}")
        self.setup = setup
        self.n_h = int(n_h)
        self.shape: Tuple[int, ...] = (self.n_h,) * setup.n
        self.total_modes = self.n_h ** setup.n

        self.frequencies = np.fft.fftfreq(self.n_h, d=1.0 / self.n_h).round().astype(int)

        S = setup.projection
        axes = [
            self.frequencies.reshape([-1 if a == i else 1 for a in range(setup.n)])
            for i in range(setup.n)
        ]
        k_squared = np.zeros(self.shape)
        for row in S:
            g = sum(row[i] * axes[i] for i in range(setup.n))
            k_squared = k_squared + g * g
        # Nyquist planes alias +N_H/2 and -N_H/2: average over H and -H so k^2 is even
        axes_all = tuple(range(setup.n))
        mirrored = np.roll(np.flip(k_squared, axis=axes_all), 1, axis=axes_all)
        self.k_squared = 0.5 * (k_squared + mirrored)
        self.k_squared.setflags(write=False)
        self.frequencies.setflags(write=False)

    def __repr__(self) -> str:
        return f"SpectralGrid(n_h={self.n_h}, modes={self.total_modes})"

    def contains(self, h: Sequence[int]) -> bool:
        half = self.n_h // 2
        return len(h) == self.setup.n and all(-half <= int(x) < half for x in h)

    def flat_index(self, h: Sequence[int]) -> int:
        """Storage index of the integer vector H"""
        if not self.contains(h):
            raise InvalidArgumentError(
                f"Mode {tuple(h)} outside grid range [-{self.n_h // 2}, {self.n_h // 2})"
            )
        position = tuple(int(x) % self.n_h for x in h)
        return int(np.ravel_multi_index(position, self.shape))

    def mode_vector(self, index: int) -> Tuple[int, ...]:
        """Integer vector H stored at a flat index"""
        if not 0 <= index < self.total_modes:
            raise InvalidArgumentError(f"Flat index {index} outside [0, {self.total_modes})")
        position = np.unravel_index(int(index), self.shape)
        return tuple(int(self.frequencies[p]) for p in position)

    def mode_vectors(self, indices: np.ndarray) -> np.ndarray:
        """Vectorized mode_vector, shape (len(indices), n)"""
        positions = np.unravel_index(np.asarray(indices, dtype=np.int64), self.shape)
        return np.stack([self.frequencies[p] for p in positions], axis=-1)

    def physical_coordinates(self, axis: int) -> np.ndarray:
        """Lifted-torus collocation coordinate x_axis, broadcastable to the grid shape"""
        x = 2.0 * np.pi * np.arange(self.n_h) / self.n_h
        return x.reshape([-1 if a == axis else 1 for a in range(self.setup.n)])


def build_grid(setup: ProjectionSetup, n_h: int) -> SpectralGrid:
    return SpectralGrid(setup, n_h)
