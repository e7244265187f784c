"""
Reduced-basis orthonormalization

Basis vectors are Hermitian spectral fields stored as complex columns. For
such vectors vdot is real up to rounding, so the real part is the inner
product and reduced coefficients stay real.
"""

import logging
from typing import Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)

DEPENDENCE_THRESHOLD = 1e-10


def inner(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.real(np.vdot(u, v)))


def orthogonalize(columns: Optional[np.ndarray], candidate: np.ndarray, passes: int = 2) -> np.ndarray:
    """Modified Gram-Schmidt of candidate against the columns, repeated `passes` times"""
    v = np.array(candidate, dtype=np.complex128).ravel()
    if columns is None or columns.shape[1] == 0:
        return v
    for _ in range(passes):
        for j in range(columns.shape[1]):
            v -= inner(columns[:, j], v) * columns[:, j]
    return v


def gram_schmidt(
    columns: Optional[np.ndarray],
    candidate: np.ndarray,
    threshold: float = DEPENDENCE_THRESHOLD
) -> Tuple[Optional[np.ndarray], float]:
    """
    Orthonormalize a new snapshot against the current basis.

    Returns (unit vector, relative residual), or (None, relative residual)
    when the snapshot is numerically dependent.
    """
    candidate = np.asarray(candidate, dtype=np.complex128).ravel()
    norm = np.linalg.norm(candidate)
    if norm == 0.0:
        return None, 0.0
    v = orthogonalize(columns, candidate)
    residual = float(np.linalg.norm(v) / norm)
    if residual < threshold:
        logger.warning(f"Snapshot is linearly dependent on the basis (relative residual {residual:.3e})")
        return None, residual
    return v / np.linalg.norm(v), residual


def orthonormality_defect(columns: np.ndarray) -> float:
    """max |W^H W - I|"""
    gram = np.real(columns.conj().T @ columns)
    return float(np.max(np.abs(gram - np.eye(columns.shape[1])))) if columns.shape[1] else 0.0
