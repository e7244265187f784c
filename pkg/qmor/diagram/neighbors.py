"""
k-nearest neighbours in the (eps, alpha) plane

Coordinates are divided by a per-axis scale (the coarse grid spacing) so the
8 nearest neighbours of a grid node form its 3x3 stencil. A FAISS flat index
supplies a float32 shortlist; the final order comes from exact float64
distances, ties broken by point index.
"""

import logging
from typing import Optional, Sequence

import numpy as np

try:
    import faiss
    FAISS_AVAILABLE = True
except ImportError:
    FAISS_AVAILABLE = False

logger = logging.getLogger(__name__)

# Extra shortlist entries to absorb float32 rounding among near-ties
SHORTLIST_SLACK = 16


def _exact_order(points: np.ndarray, i: int, candidates: np.ndarray, k: int) -> np.ndarray:
    candidates = candidates[(candidates >= 0) & (candidates != i)]
    candidates = np.unique(candidates)
    d2 = np.sum((points[candidates] - points[i]) ** 2, axis=1)
    order = np.lexsort((candidates, d2))
    return candidates[order[:k]]


def nearest_neighbors(
    mus: np.ndarray,
    k: int = 8,
    scale: Optional[Sequence[float]] = None,
    use_faiss: bool = True
) -> np.ndarray:
    """Row i lists the indices of the k nearest other points (padded with -1)"""
    mus = np.asarray(mus, dtype=float).reshape(-1, 2)
    n = mus.shape[0]
    out = np.full((n, k), -1, dtype=np.int64)
    if n < 2:
        return out
    points = mus / (np.asarray(scale, dtype=float) if scale is not None else 1.0)

    if use_faiss and FAISS_AVAILABLE:
        index = faiss.IndexFlatL2(2)
        index.add(np.ascontiguousarray(points, dtype=np.float32))
        shortlist = min(n, k + 1 + SHORTLIST_SLACK)
        _, candidates = index.search(np.ascontiguousarray(points, dtype=np.float32), shortlist)
        for i in range(n):
            row = _exact_order(points, i, candidates[i], k)
            out[i, :row.size] = row
        return out

    everything = np.arange(n)
    for i in range(n):
        row = _exact_order(points, i, everything, k)
        out[i, :row.size] = row
    return out
