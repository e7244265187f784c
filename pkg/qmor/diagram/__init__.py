"""Phase diagrams - classification, uniform sweeps, adaptive boundary refinement"""

from qmor.diagram.types import PhasePoint, PhaseDiagram, UNRESOLVED
from qmor.diagram.classify import PhaseClassifier, select_stable
from qmor.diagram.neighbors import nearest_neighbors, FAISS_AVAILABLE
from qmor.diagram.refine import (
    uniform_diagram, refine_boundaries, boundary_midpoints, region_count,
    write_diagram, load_diagram
)

__all__ = [
    "PhasePoint", "PhaseDiagram", "UNRESOLVED",
    "PhaseClassifier", "select_stable",
    "nearest_neighbors", "FAISS_AVAILABLE",
    "uniform_diagram", "refine_boundaries", "boundary_midpoints", "region_count",
    "write_diagram", "load_diagram",
]
