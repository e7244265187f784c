"""
Uniform and adaptive phase-diagram generation

The adaptive scheme starts from a classified coarse grid and, each
iteration, inserts the midpoint of every pair of nearest neighbours with
different labels. Existing points are never re-classified.
"""

import logging
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy import ndimage

from qmor import storage
from qmor.errors import InvalidArgumentError
from qmor.fom.types import STATE_ORDER, StateLabel, mu_key
from qmor.parallel import parallel_map
from qmor.diagram.classify import PhaseClassifier
from qmor.diagram.neighbors import nearest_neighbors
from qmor.diagram.types import UNRESOLVED, PhaseDiagram, PhasePoint

logger = logging.getLogger(__name__)

DIAGRAM_HEADER = ["epsilon", "alpha", "label", "generation", "energy_min"]
HISTORY_HEADER = (
    ["iteration", "points_added", "total_points"]
    + [f"seconds_{s.value}" for s in STATE_ORDER]
    + ["seconds_total"]
)


def _history_row(iteration: int, added: List[PhasePoint], total: int, seconds: float) -> Dict[str, Any]:
    row: Dict[str, Any] = {"iteration": iteration, "points_added": len(added), "total_points": total}
    for label in STATE_ORDER:
        row[f"seconds_{label.value}"] = sum(p.seconds.get(label, 0.0) for p in added)
    row["seconds_total"] = seconds
    return row


def uniform_diagram(
    classifier: PhaseClassifier,
    eps_values: Sequence[float],
    alpha_values: Sequence[float],
    workers: int = 1
) -> PhaseDiagram:
    """Classify every node of an eps x alpha grid (eps-major order)"""
    eps_values = [float(e) for e in eps_values]
    alpha_values = [float(a) for a in alpha_values]
    if not eps_values or not alpha_values:
        raise InvalidArgumentError("Diagram grid must have at least one node per axis")
    mus = [mu_key((e, a)) for e in eps_values for a in alpha_values]
    started = time.perf_counter()
    points = parallel_map(lambda mu: classifier.classify_or_unresolved(mu, 0), mus, workers)
    diagram = PhaseDiagram(
        bounds=((min(eps_values), max(eps_values)), (min(alpha_values), max(alpha_values))),
        points=points,
        shape=(len(eps_values), len(alpha_values)),
    )
    diagram.history.append(_history_row(0, points, len(diagram), time.perf_counter() - started))
    logger.info(f"Classified {len(diagram)} grid point(s) in {time.perf_counter() - started:.1f}s: {diagram.counts()}")
    return diagram


def grid_spacing(diagram: PhaseDiagram) -> Optional[np.ndarray]:
    """Per-axis spacing of the initial grid, used to scale neighbour distances"""
    if diagram.shape is None:
        return None
    (e0, e1), (a0, a1) = diagram.bounds
    n_eps, n_alpha = diagram.shape
    spacing = np.array([
        (e1 - e0) / (n_eps - 1) if n_eps > 1 else 1.0,
        (a1 - a0) / (n_alpha - 1) if n_alpha > 1 else 1.0,
    ])
    spacing[spacing == 0.0] = 1.0
    return spacing


def boundary_midpoints(diagram: PhaseDiagram, k: int = 8, scale=None) -> List[tuple]:
    """Deduplicated midpoints of differently labeled neighbour pairs not yet in the diagram"""
    mus = diagram.mus
    labels = diagram.label_texts
    neighbors = nearest_neighbors(mus, k=k, scale=scale)
    seen = set()
    out = []
    for i in range(len(diagram)):
        for j in neighbors[i]:
            if j < 0 or labels[j] == labels[i]:
                continue
            mid = mu_key(0.5 * (mus[i] + mus[j]))
            if mid in seen or mid in diagram:
                continue
            seen.add(mid)
            out.append(mid)
    return out


def refine_boundaries(
    diagram: PhaseDiagram,
    classifier: PhaseClassifier,
    iterations: int,
    workers: int = 1,
    k: int = 8
) -> PhaseDiagram:
    """Insert and classify boundary midpoints, iterations times or until none remain"""
    scale = grid_spacing(diagram)
    start = len(diagram.history)
    for iteration in range(start, start + iterations):
        started = time.perf_counter()
        candidates = boundary_midpoints(diagram, k=k, scale=scale)
        added = parallel_map(lambda mu: classifier.classify_or_unresolved(mu, iteration), candidates, workers)
        for point in added:
            diagram.add(point)
        diagram.history.append(_history_row(iteration, added, len(diagram), time.perf_counter() - started))
        logger.info(
            f"Refinement iteration {iteration}: +{len(added)} point(s), {len(diagram)} total "
            f"({time.perf_counter() - started:.1f}s)"
        )
        if not added:
            logger.info("No boundary pair left, refinement reached a fixed point")
            break
    return diagram


def region_count(diagram: PhaseDiagram) -> int:
    """Connected same-label regions of a structured diagram (4-neighbour connectivity)"""
    if diagram.shape is None or len(diagram) != diagram.shape[0] * diagram.shape[1]:
        raise InvalidArgumentError("Region count needs an unrefined structured diagram")
    texts = np.array(diagram.label_texts).reshape(diagram.shape)
    total = 0
    for text in np.unique(texts):
        _, n = ndimage.label(texts == text)
        total += int(n)
    return total


def write_diagram(directory: Path, diagram: PhaseDiagram) -> Path:
    directory = Path(directory)
    storage.write_csv(directory / "diagram.csv", DIAGRAM_HEADER, (p.to_row() for p in diagram.points))
    storage.write_csv(
        directory / "history.csv",
        HISTORY_HEADER,
        ([row.get(col) for col in HISTORY_HEADER] for row in diagram.history),
    )
    storage.write_manifest(directory, "phase_diagram", {
        "bounds": [list(b) for b in diagram.bounds],
        "shape": list(diagram.shape) if diagram.shape is not None else None,
        "points": len(diagram),
        "counts": diagram.counts(),
        "ties": [list(p.mu) for p in diagram.points if p.tie],
    })
    return directory


def load_diagram(directory: Path) -> PhaseDiagram:
    """Read diagram.csv back; energies other than the minimum are not stored"""
    directory = Path(directory)
    manifest = storage.read_manifest(directory, kind="phase_diagram")
    points = []
    for row in storage.read_csv(directory / "diagram.csv"):
        text = row["label"]
        label = None if text == UNRESOLVED else StateLabel.parse(text)
        energies = {label: float(row["energy_min"])} if label is not None and row["energy_min"] else {}
        points.append(PhasePoint(
            mu=(float(row["epsilon"]), float(row["alpha"])),
            label=label,
            energies=energies,
            generation=int(row["generation"]),
        ))
    bounds = tuple(tuple(b) for b in manifest["bounds"])
    shape = tuple(manifest["shape"]) if manifest.get("shape") else None
    diagram = PhaseDiagram(bounds=bounds, points=points, shape=shape)
    history_path = directory / "history.csv"
    if history_path.exists():
        diagram.history = [
            {k: float(v) for k, v in row.items() if v != ""} for row in storage.read_csv(history_path)
        ]
    return diagram
