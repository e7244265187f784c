"""
Fourier and physical fields on the lifted torus, plus their on-disk format

A persisted field is a directory with manifest.json and field.bin. field.bin
holds little-endian float64 values, real/imag interleaved, row-major over
(h1, h2, h3, h4) with FFT-shifted frequencies (first entry is H = -N_H/2).
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from qmor.errors import ArtifactError
from qmor.spectral.geometry import ProjectionSetup
from qmor.spectral.grid import SpectralGrid
from qmor import storage

CONVENTION = "phi(x)=sum_H phihat(H)exp(iH.x); forward/N; fftshift row-major h1h2h3h4"


@dataclass
class FourierField:
    """Spectral coefficients phihat(H) in grid storage order"""
    coefficients: np.ndarray
    grid: SpectralGrid

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=np.complex128)
        if self.coefficients.shape != self.grid.shape:
            self.coefficients = self.coefficients.reshape(self.grid.shape)

    @classmethod
    def zeros(cls, grid: SpectralGrid) -> "FourierField":
        return cls(np.zeros(grid.shape, dtype=np.complex128), grid)

    @property
    def flat(self) -> np.ndarray:
        return self.coefficients.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.flat))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coefficients)))

    def copy(self) -> "FourierField":
        return FourierField(self.coefficients.copy(), self.grid)

    def __getitem__(self, h) -> complex:
        return complex(self.flat[self.grid.flat_index(h)])

    def hermitian_defect(self) -> float:
        """max |phihat(-H) - conj(phihat(H))|"""
        from qmor.spectral.transforms import reflect
        return float(np.max(np.abs(reflect(self.coefficients) - np.conj(self.coefficients))))


@dataclass
class PhysicalField:
    """Real samples of phi on the uniform N_H^4 torus grid"""
    values: np.ndarray
    grid: SpectralGrid

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            self.values = self.values.reshape(self.grid.shape)

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)


def save_field(
    directory: Path,
    field: FourierField,
    label: Optional[str] = None,
    mu: Optional[Tuple[float, float]] = None,
    extra: Optional[Dict[str, Any]] = None
) -> Path:
    """Persist a Fourier field as manifest.json + field.bin"""
    directory = Path(directory)
    payload = {
        "n_h": field.grid.n_h,
        "q": field.grid.setup.q,
        "convention": CONVENTION,
        "state_label": label,
        "epsilon": None if mu is None else float(mu[0]),
        "alpha": None if mu is None else float(mu[1]),
    }
    if extra:
        payload.update(extra)
    storage.write_manifest(directory, "fourier_field", payload)
    storage.write_blob(directory / "field.bin", np.fft.fftshift(field.coefficients))
    return directory


def load_field(directory: Path, grid: Optional[SpectralGrid] = None) -> Tuple[FourierField, Dict[str, Any]]:
    """Read a persisted field; builds the grid from the manifest when none is given"""
    directory = Path(directory)
    manifest = storage.read_manifest(directory, kind="fourier_field")
    if manifest.get("convention") != CONVENTION:
        raise ArtifactError(f"{directory}: unknown convention '{manifest.get('convention')}'")
    if grid is None:
        grid = SpectralGrid(ProjectionSetup(q=float(manifest["q"])), int(manifest["n_h"]))
    elif grid.n_h != manifest["n_h"]:
        raise ArtifactError(f"{directory}: stored N_H={manifest['n_h']}, grid has {grid.n_h}")
    shifted = storage.read_blob(directory / "field.bin", grid.shape, complex_values=True)
    return FourierField(np.fft.ifftshift(shifted), grid), manifest
