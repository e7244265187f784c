"""
Persistence of trained EIM and reduced components

    components/<label>/manifest.json        sizes, constants, selected/pruned mu
    components/<label>/<name>.bin           W, iW, A1..A3, E1, B1..B6, restrictions
    components/<label>/history.csv          greedy and testing error curves
    components/<label>/eim_g/, eim_h/       basis.bin, interp.bin, points.json, params.csv
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from qmor import storage
from qmor.errors import ArtifactError
from qmor.fom.types import StateLabel, mu_key
from qmor.reduction.component import MATRIX_NAMES, ReducedComponent
from qmor.reduction.eim import EimComponent, EimTarget
from qmor.spectral.geometry import ProjectionSetup
from qmor.spectral.grid import SpectralGrid

logger = logging.getLogger(__name__)

HISTORY_HEADER = [
    "N", "worst_indicator", "worst_true_error", "epsilon", "alpha", "seconds",
    "test_solution_error", "test_energy_error",
]
EIM_PARAMS_HEADER = ["m", "epsilon", "alpha", "training_error"]


def component_dir(root: Path, label: StateLabel) -> Path:
    return Path(root) / "components" / StateLabel(label).value


def save_eim(directory: Path, eim: EimComponent) -> Path:
    directory = Path(directory)
    storage.write_manifest(directory, "eim_component", {
        "target": eim.target.value,
        "state_label": eim.label.value,
        "size": eim.size,
        "grid_size": eim.grid_size,
    })
    storage.write_blob(directory / "basis.bin", eim.basis)
    storage.write_blob(directory / "interp.bin", eim.interp_matrix)
    with open(directory / "points.json", "w") as f:
        json.dump([int(x) for x in eim.points], f)
    rows = [
        [m + 1, mu[0], mu[1], err]
        for m, (mu, err) in enumerate(zip(eim.selected_params, eim.training_errors))
    ]
    storage.write_csv(directory / "params.csv", EIM_PARAMS_HEADER, rows)
    return directory


def load_eim(directory: Path) -> EimComponent:
    directory = Path(directory)
    manifest = storage.read_manifest(directory, kind="eim_component")
    m, size = int(manifest["size"]), int(manifest["grid_size"])
    points_path = directory / "points.json"
    if not points_path.exists():
        raise ArtifactError(f"Missing EIM points: {points_path}")
    with open(points_path, "r") as f:
        points = np.array(json.load(f), dtype=np.int64)
    params = storage.read_csv(directory / "params.csv")
    return EimComponent(
        target=EimTarget(manifest["target"]),
        label=StateLabel.parse(manifest["state_label"]),
        basis=storage.read_blob(directory / "basis.bin", (m, size)),
        points=points,
        interp_matrix=storage.read_blob(directory / "interp.bin", (m, m)),
        selected_params=[mu_key((float(r["epsilon"]), float(r["alpha"]))) for r in params],
        training_errors=[float(r["training_error"]) for r in params],
    )


def _blobs(comp: ReducedComponent) -> Dict[str, np.ndarray]:
    blobs = {name: getattr(comp, name) for name in MATRIX_NAMES}
    blobs.update({
        "W": comp.W,
        "iW": comp.iW,
        "point_g": comp.point_g,
        "point_h": comp.point_h,
        "h_weights": comp.h_weights,
        "seed_coefficients": comp.seed_coefficients,
        "multiplier_values": comp.multiplier_values,
    })
    return blobs


def merge_history(history: List[Dict[str, float]], test_rows: Optional[List[Dict[str, float]]]) -> List[Dict[str, float]]:
    by_n = {int(row["N"]): dict(row) for row in history}
    for row in test_rows or []:
        by_n.setdefault(int(row["N"]), {"N": int(row["N"])}).update(row)
    return [by_n[n] for n in sorted(by_n)]


def save_component(
    directory: Path,
    comp: ReducedComponent,
    test_rows: Optional[List[Dict[str, float]]] = None
) -> Path:
    """Write a trained component with its EIM pair; blobs round-trip bit for bit"""
    comp.require_trained()
    directory = Path(directory)
    blobs = _blobs(comp)
    storage.write_manifest(directory, "reduced_component", {
        "state_label": comp.label.value,
        "n": comp.size,
        "m": comp.eim_g.size,
        "l": comp.eim_h.size,
        "n_h": comp.grid.n_h,
        "q": comp.q,
        "c": comp.c,
        "dt": comp.dt,
        "u0": comp.u0,
        "selected_params": [list(mu) for mu in comp.selected_params],
        "pruned_params": [list(mu) for mu in comp.pruned_params],
        "shapes": {name: list(np.shape(a)) for name, a in blobs.items()},
        "complex": ["W"],
    })
    for name, array in blobs.items():
        storage.write_blob(directory / f"{name}.bin", array)
    history = merge_history(comp.history, test_rows)
    storage.write_csv(
        directory / "history.csv",
        HISTORY_HEADER,
        ([row.get(col) for col in HISTORY_HEADER] for row in history),
    )
    save_eim(directory / "eim_g", comp.eim_g)
    save_eim(directory / "eim_h", comp.eim_h)
    logger.info(f"Saved {comp} to {directory}")
    return directory


def load_component(directory: Path, grid: Optional[SpectralGrid] = None) -> ReducedComponent:
    directory = Path(directory)
    manifest = storage.read_manifest(directory, kind="reduced_component")
    if grid is None:
        grid = SpectralGrid(ProjectionSetup(q=float(manifest["q"])), int(manifest["n_h"]))
    elif grid.n_h != int(manifest["n_h"]):
        raise ArtifactError(f"{directory}: trained at N_H={manifest['n_h']}, requested {grid.n_h}")

    comp = ReducedComponent(
        StateLabel.parse(manifest["state_label"]),
        grid,
        load_eim(directory / "eim_g"),
        load_eim(directory / "eim_h"),
        c=float(manifest["c"]),
        dt=float(manifest["dt"]),
        u0=float(manifest["u0"]),
    )
    shapes = manifest["shapes"]
    complex_names = set(manifest.get("complex", []))
    for name, shape in shapes.items():
        setattr(comp, name, storage.read_blob(directory / f"{name}.bin", shape, complex_values=name in complex_names))
    comp.selected_params = [mu_key(mu) for mu in manifest.get("selected_params", [])]
    comp.pruned_params = [mu_key(mu) for mu in manifest.get("pruned_params", [])]

    history_path = directory / "history.csv"
    if history_path.exists():
        comp.history = [
            {k: (float(v) if k != "N" else int(v)) for k, v in row.items() if v != ""}
            for row in storage.read_csv(history_path)
        ]
    return comp


def trained_labels(root: Path) -> List[StateLabel]:
    base = Path(root) / "components"
    if not base.exists():
        return []
    return [
        label for label in StateLabel
        if (base / label.value / "manifest.json").exists()
    ]
