"""
Shared FOM snapshot pool

Every full-order solve of the training pipeline lands here, keyed by mu.
All five seeds are solved at once, so a parameter visited while training
one component also supplies branches for the others.

On disk (under the artifact root):
    fom/<eps>_<alpha>/<label>/manifest.json + field.bin
    fom/<eps>_<alpha>/energies.csv
    pool/index.json
"""

import logging
import threading
from pathlib import Path
from typing import Dict, Iterable, List, Optional

from qmor import storage
from qmor.fom.seeds import seed_state
from qmor.fom.solver import FullOrderSolver
from qmor.fom.types import (
    Branch, BranchOutcome, Mu, PhaseSteadySolutionSet, StateLabel, mu_key
)
from qmor.spectral.field import FourierField, load_field, save_field
from qmor.spectral.grid import SpectralGrid

logger = logging.getLogger(__name__)

ENERGY_HEADER = ["epsilon", "alpha", "label", "energy", "iterations", "outcome"]


def solution_set_dir(root: Path, mu) -> Path:
    return Path(root) / "fom" / storage.mu_dirname(mu_key(mu))


def save_solution_set(root: Path, pss: PhaseSteadySolutionSet) -> Path:
    """Persist converged branch fields and the per-mu energies table"""
    directory = solution_set_dir(root, pss.mu)
    directory.mkdir(parents=True, exist_ok=True)
    for label, branch in pss.branches.items():
        if branch.field is None:
            continue
        save_field(
            directory / label.value,
            branch.field,
            label=label.value,
            mu=pss.mu,
            extra={
                "outcome": branch.outcome.value,
                "iterations": branch.iterations,
                "residual": branch.residual,
                "energy": branch.energy,
                "seconds": branch.seconds,
                "u0": branch.seed.u0,
            },
        )
    rows = [
        [pss.mu[0], pss.mu[1], b.label.value, b.energy, b.iterations, b.outcome.value]
        for b in pss.attempts.values()
    ]
    rows += [
        [pss.mu[0], pss.mu[1], label.value, None, 0, "failed"]
        for label in pss.failures
    ]
    storage.write_csv(directory / "energies.csv", ENERGY_HEADER, rows)
    return directory


def load_branch(root: Path, mu, label: StateLabel, grid: Optional[SpectralGrid] = None) -> Branch:
    field, manifest = load_field(solution_set_dir(root, mu) / StateLabel(label).value, grid)
    return Branch(
        mu=mu_key(mu),
        seed=seed_state(label, manifest.get("u0", 0.0)),
        outcome=BranchOutcome(manifest["outcome"]),
        iterations=int(manifest["iterations"]),
        residual=float(manifest["residual"]),
        field=field,
        energy=manifest.get("energy"),
        seconds=float(manifest.get("seconds", 0.0)),
    )


class SnapshotPool:
    """
    mu -> PhaseSteadySolutionSet cache backed by the FOM solver.

    With a root directory every new set is persisted immediately. With
    keep_fields=False the in-memory branches drop their fields after
    persisting; field() reloads them on demand.
    """

    def __init__(self, root: Optional[Path] = None, keep_fields: bool = True):
        self.root = Path(root) if root is not None else None
        self.keep_fields = keep_fields or self.root is None
        self._sets: Dict[Mu, PhaseSteadySolutionSet] = {}
        self._lock = threading.Lock()
        self.fom_calls = 0
        self.fom_seconds = 0.0

    def __contains__(self, mu) -> bool:
        return mu_key(mu) in self._sets

    def __len__(self) -> int:
        return len(self._sets)

    @property
    def mus(self) -> List[Mu]:
        return sorted(self._sets)

    def get(self, mu) -> Optional[PhaseSteadySolutionSet]:
        return self._sets.get(mu_key(mu))

    def put(self, pss: PhaseSteadySolutionSet) -> None:
        with self._lock:
            if self.root is not None:
                save_solution_set(self.root, pss)
                if not self.keep_fields:
                    for branch in pss.branches.values():
                        branch.field = None
            for branch in pss.attempts.values():
                if branch.outcome != BranchOutcome.CONVERGED:
                    branch.field = None
            self._sets[pss.mu] = pss
            if self.root is not None:
                self._write_index()

    def pss(self, mu, solver: FullOrderSolver, workers: int = 1) -> PhaseSteadySolutionSet:
        """Cached solveAllBranches"""
        key = mu_key(mu)
        cached = self._sets.get(key)
        if cached is not None:
            return cached
        pss = solver.solve_all_branches(key, workers=workers)
        with self._lock:
            self.fom_calls += 1
            self.fom_seconds += sum(b.seconds for b in pss.attempts.values())
        self.put(pss)
        return pss

    def field(self, mu, label: StateLabel, grid: Optional[SpectralGrid] = None) -> Optional[FourierField]:
        pss = self.get(mu)
        if pss is None or label not in pss:
            return None
        branch = pss.get(label)
        if branch.field is not None:
            return branch.field
        if self.root is None:
            return None
        return load_branch(self.root, pss.mu, label, grid).field

    def branches(self, label: StateLabel, mus: Optional[Iterable] = None) -> List[Branch]:
        """Converged branches of one state, in parameter order"""
        keys = self.mus if mus is None else [mu_key(m) for m in mus]
        out = []
        for key in keys:
            pss = self._sets.get(key)
            if pss is not None and label in pss:
                out.append(pss.get(label))
        return out

    def _write_index(self) -> None:
        entries = []
        for key in sorted(self._sets):
            pss = self._sets[key]
            entries.append({
                "epsilon": key[0],
                "alpha": key[1],
                "attempts": {
                    b.label.value: {
                        "outcome": b.outcome.value,
                        "iterations": b.iterations,
                        "residual": b.residual,
                        "energy": b.energy,
                        "seconds": b.seconds,
                        "u0": b.seed.u0,
                    }
                    for b in pss.attempts.values()
                },
                "failures": {k.value: v for k, v in pss.failures.items()},
            })
        storage.write_manifest(self.root / "pool", "snapshot_pool", {"entries": entries}, name="index.json")

    @classmethod
    def load(cls, root: Path, grid: Optional[SpectralGrid] = None, keep_fields: bool = False) -> "SnapshotPool":
        """Rebuild the pool from pool/index.json; converged fields load lazily unless keep_fields"""
        root = Path(root)
        pool = cls(root, keep_fields=keep_fields)
        if not (root / "pool" / "index.json").exists():
            return pool
        index = storage.read_manifest(root / "pool", "snapshot_pool", name="index.json")

        for entry in index.get("entries", []):
            mu = mu_key((entry["epsilon"], entry["alpha"]))
            pss = PhaseSteadySolutionSet(mu=mu)
            for name, record in entry.get("attempts", {}).items():
                label = StateLabel.parse(name)
                outcome = BranchOutcome(record["outcome"])
                field = None
                if outcome == BranchOutcome.CONVERGED and keep_fields:
                    field = load_branch(root, mu, label, grid).field
                pss.add(Branch(
                    mu=mu,
                    seed=seed_state(label, record.get("u0", 0.0)),
                    outcome=outcome,
                    iterations=int(record["iterations"]),
                    residual=float(record["residual"]),
                    field=field,
                    energy=record.get("energy"),
                    seconds=float(record.get("seconds", 0.0)),
                ))
            for name, message in entry.get("failures", {}).items():
                pss.failures[StateLabel.parse(name)] = message
            pool._sets[mu] = pss
        logger.info(f"Loaded snapshot pool with {len(pool)} parameter(s) from {root}")
        return pool
