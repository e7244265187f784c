"""
Spectral transforms and diagonal operators

Convention: phi(x) = sum_H phihat(H) exp(i H.x) on x in [0, 2pi)^4; the
physical-to-spectral transform divides by the number of modes, so
coefficients are Fourier-series coefficients. Products are plain
pseudospectral products (no dealiasing).
"""

import numpy as np

from qmor.errors import InvalidArgumentError
from qmor.spectral.field import FourierField, PhysicalField
from qmor.spectral.grid import SpectralGrid

_AXES = (0, 1, 2, 3)


def reflect(coefficients: np.ndarray) -> np.ndarray:
    """Array of phihat(-H) in storage order"""
    axes = tuple(range(coefficients.ndim))
    return np.roll(np.flip(coefficients, axis=axes), 1, axis=axes)


def hermitian_part(coefficients: np.ndarray) -> np.ndarray:
    """(phihat(H) + conj(phihat(-H))) / 2, Hermitian to the last bit"""
    return 0.5 * (coefficients + np.conj(reflect(coefficients)))


def to_physical(field: FourierField) -> PhysicalField:
    values = np.fft.ifftn(field.coefficients, axes=_AXES, norm="forward")
    return PhysicalField(values.real, field.grid)


def to_physical_complex(field: FourierField) -> np.ndarray:
    """Inverse transform without discarding the imaginary residue"""
    return np.fft.ifftn(field.coefficients, axes=_AXES, norm="forward")


def to_spectral(physical: PhysicalField) -> FourierField:
    coefficients = np.fft.fftn(physical.values, axes=_AXES, norm="forward")
    return FourierField(hermitian_part(coefficients), physical.grid)


def spectral_from_values(values: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """Flat spectral image of a flat physical array"""
    return to_spectral(PhysicalField(values, grid)).flat.copy()


def physical_from_coefficients(coefficients: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """Flat physical image of flat spectral coefficients"""
    return to_physical(FourierField(coefficients, grid)).flat.copy()


def resonance_factor(grid: SpectralGrid, q: float) -> np.ndarray:
    """(1 - k^2)^2 (q^2 - k^2)^2, the penalty-free linear multiplier"""
    k2 = grid.k_squared
    return (1.0 - k2) ** 2 * (q * q - k2) ** 2


def linear_multiplier(grid: SpectralGrid, c: float, q: float) -> np.ndarray:
    """c (1 - k^2)^2 (q^2 - k^2)^2 per mode"""
    if not c > 0:
        raise InvalidArgumentError(f"Energy penalty c must be positive, got {c}")
    return c * resonance_factor(grid, q)


def evaluate_quasiperiodic(
    field: FourierField,
    points: np.ndarray,
    threshold: float = 1e-10,
    batch: int = 4096
) -> np.ndarray:
    """
    Physical 2D field phi(r) = sum_H phihat(H) exp(i (S.H).r) at arbitrary points.

    Only modes with |phihat| > threshold contribute. points has shape (P, 2).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != field.grid.setup.d:
        raise InvalidArgumentError(f"Points must have {field.grid.setup.d} columns, got {points.shape[1]}")
    flat = field.flat
    significant = np.flatnonzero(np.abs(flat) > threshold)
    if significant.size == 0:
        return np.zeros(points.shape[0])
    modes = field.grid.mode_vectors(significant).astype(float)
    wave_vectors = modes @ field.grid.setup.projection.T
    amplitudes = flat[significant]
    out = np.empty(points.shape[0])
    for start in range(0, points.shape[0], batch):
        phases = points[start:start + batch] @ wave_vectors.T
        out[start:start + batch] = (np.exp(1j * phases) @ amplitudes).real
    return out
