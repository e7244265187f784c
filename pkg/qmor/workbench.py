"""
Workbench - pipeline orchestration behind the command line

One Workbench wires a validated config to the spectral grid, the FOM
solver, the persisted snapshot pool and the trained components, and runs
the fom / train / online / diagram / validate / export commands on them.
Every command persists its artifacts under config.paths.root.
"""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from qmor import storage
from qmor.config import GridSpec, WorkbenchConfig
from qmor.diagram.classify import PhaseClassifier
from qmor.diagram.refine import DIAGRAM_HEADER, load_diagram, refine_boundaries, uniform_diagram, write_diagram
from qmor.diagram.types import PhaseDiagram
from qmor.errors import ArtifactError, ComponentUntrainableError, InvalidArgumentError
from qmor.fom.pool import SnapshotPool, load_branch, save_solution_set
from qmor.fom.solver import FullOrderSolver
from qmor.fom.types import STATE_ORDER, Branch, Mu, PhaseSteadySolutionSet, StateLabel
from qmor.parallel import resolve_workers
from qmor.reduction.component import ReducedComponent
from qmor.reduction.greedy import fill_pool, greedy_offline, evaluate_testing_errors, train_component_eims
from qmor.reduction.online import OnlineSolution, online_solve, reconstruct, relative_error
from qmor.reduction.store import component_dir, load_component, save_component, trained_labels
from qmor.spectral.field import FourierField, save_field
from qmor.spectral.grid import SpectralGrid
from qmor.spectral.transforms import evaluate_quasiperiodic
from qmor.validate import ValidationReport, run_validation

logger = logging.getLogger(__name__)

EXPORT_HEADER = ["x", "y", "phi"]


def parse_states(text: Optional[str]) -> List[StateLabel]:
    """'all', None, or a comma-separated list of labels, returned in canonical order"""
    if text is None or text.strip().lower() == "all":
        return list(STATE_ORDER)
    wanted = {StateLabel.parse(part) for part in text.split(",") if part.strip()}
    if not wanted:
        raise InvalidArgumentError(f"No state labels in '{text}'")
    return [s for s in STATE_ORDER if s in wanted]


@dataclass
class OnlineResult:
    """One online solve, with its FOM comparison when requested"""
    solution: OnlineSolution
    solution_error: Optional[float] = None
    energy_error: Optional[float] = None
    fom_energy: Optional[float] = None
    fom_seconds: Optional[float] = None
    fom_outcome: Optional[str] = None
    field_dir: Optional[Path] = None

    @property
    def speedup(self) -> Optional[float]:
        if self.fom_seconds is None:
            return None
        return self.fom_seconds / max(self.solution.seconds, 1e-12)

    def to_dict(self) -> Dict[str, Any]:
        out = self.solution.to_dict()
        out.update({
            "solution_error": self.solution_error,
            "energy_error": self.energy_error,
            "fom_energy": self.fom_energy,
            "fom_seconds": self.fom_seconds,
            "fom_outcome": self.fom_outcome,
            "speedup": self.speedup,
            "field_dir": str(self.field_dir) if self.field_dir else None,
        })
        return out


@dataclass
class TrainSummary:
    trained: List[StateLabel] = field(default_factory=list)
    skipped: List[StateLabel] = field(default_factory=list)
    failed: Dict[StateLabel, str] = field(default_factory=dict)
    fom_calls: int = 0
    fom_seconds: float = 0.0
    seconds: float = 0.0


class Workbench:
    """Commands over one configuration and artifact root"""

    def __init__(self, config: WorkbenchConfig, strict: bool = False):
        self.config = config
        self.strict = strict
        self.workers = resolve_workers(config.parallel.workers)
        self._grid: Optional[SpectralGrid] = None
        self._solver: Optional[FullOrderSolver] = None
        self._pool: Optional[SnapshotPool] = None

    @property
    def root(self) -> Path:
        return self.config.root

    @property
    def grid(self) -> SpectralGrid:
        if self._grid is None:
            self._grid = self.config.build_grid()
        return self._grid

    @property
    def solver(self) -> FullOrderSolver:
        if self._solver is None:
            self._solver = FullOrderSolver(
                self.grid, c=self.config.model.c, u0=self.config.model.u0,
                config=self.config.solver_config(),
                seed_amplitudes=self.config.model.amplitudes(),
            )
        return self._solver

    @property
    def pool(self) -> SnapshotPool:
        if self._pool is None:
            self._pool = SnapshotPool.load(self.root, self.grid)
            logger.info(f"Snapshot pool at {self.root} holds {len(self._pool)} parameter(s)")
        return self._pool

    def check_mu(self, mu) -> Mu:
        return self.config.check_mu(mu, strict=self.strict)

    # ------------------------------------------------------------ fom

    def fom(self, mu, states: Optional[Sequence[StateLabel]] = None) -> PhaseSteadySolutionSet:
        """
        Solve the requested seeds at mu and persist them.

        A full five-seed run joins the snapshot pool; a partial run is only
        written to fom/<mu>/ so the pool never holds incomplete sets.
        """
        key = self.check_mu(mu)
        labels = list(states) if states else list(STATE_ORDER)
        if len(labels) == len(STATE_ORDER):
            return self.pool.pss(key, self.solver, workers=self.workers)
        pss = self.solver.solve_all_branches(key, labels=labels, workers=self.workers)
        save_solution_set(self.root, pss)
        return pss

    # ------------------------------------------------------------ train

    def train(self, states: Optional[Sequence[StateLabel]] = None, force: bool = False) -> TrainSummary:
        """
        Fill the shared pool on the training set, then train each requested
        state's EIM pair and reduced component. Existing components are kept
        unless force is set.
        """
        started = time.perf_counter()
        training = self.config.training
        labels = list(states) if states else list(STATE_ORDER)
        summary = TrainSummary()
        existing = set(trained_labels(self.root))
        todo = [s for s in labels if force or s not in existing]
        summary.skipped = [s for s in labels if s not in todo]
        for label in summary.skipped:
            logger.info(f"{label.value} component already trained, skipping (use --force to retrain)")
        if not todo:
            return summary

        train_set = training.train.points()
        for mu in train_set:
            self.check_mu(mu)
        fill_pool(self.pool, self.solver, train_set, self.workers)
        eim_set = self.config.eim_parameters()

        for label in todo:
            caps = training.caps_for(label)
            try:
                eim_g, eim_h = train_component_eims(
                    label, self.pool, eim_set, self.solver, caps.m, caps.l, training.tol_eim
                )
                comp = greedy_offline(
                    label, train_set, self.pool, self.solver, eim_g, eim_h,
                    caps.n, training.tol_rb, self.workers,
                )
            except ComponentUntrainableError as e:
                logger.error(str(e))
                summary.failed[label] = str(e)
                continue
            test_rows = evaluate_testing_errors(comp, training.test.points(), self.pool, self.solver, self.workers)
            save_component(component_dir(self.root, label), comp, test_rows)
            summary.trained.append(label)

        summary.fom_calls = self.pool.fom_calls
        summary.fom_seconds = self.pool.fom_seconds
        summary.seconds = time.perf_counter() - started
        if summary.failed and not summary.trained:
            first = next(iter(summary.failed))
            raise ComponentUntrainableError(first.value)
        return summary

    # ------------------------------------------------------------ online

    def load_components(self, states: Optional[Iterable[StateLabel]] = None) -> Dict[StateLabel, ReducedComponent]:
        """Trained components on this config's grid; a missing one raises with a hint"""
        labels = list(states) if states else list(STATE_ORDER)
        components = {}
        for label in labels:
            directory = component_dir(self.root, label)
            if not (directory / "manifest.json").exists():
                raise ArtifactError(
                    f"No trained {label.value} component under {self.root} "
                    f"(run: python -m qmor train --states {label.value})"
                )
            components[label] = load_component(directory, self.grid)
        return components

    def _fom_reference(self, mu: Mu, label: StateLabel) -> Branch:
        """Persisted FOM branch at mu if there is one, else a fresh solve"""
        try:
            branch = load_branch(self.root, mu, label, self.grid)
            if branch.field is not None and branch.seconds > 0:
                return branch
        except ArtifactError:
            pass
        return self.solver.solve_branch(mu, self.solver.seed(label))

    def online(
        self,
        mu,
        states: Optional[Sequence[StateLabel]] = None,
        compare_fom: bool = False,
        save_fields: bool = False
    ) -> List[OnlineResult]:
        key = self.check_mu(mu)
        components = self.load_components(states)
        results = []
        for label, comp in components.items():
            solution = online_solve(comp, key, self.solver.config)
            result = OnlineResult(solution=solution)
            if compare_fom:
                branch = self._fom_reference(key, label)
                result.fom_seconds = branch.seconds
                result.fom_outcome = branch.outcome.value
                result.fom_energy = branch.energy
                if branch.field is not None:
                    result.solution_error = relative_error(comp, solution.coefficients, branch.field)
                if branch.energy:
                    result.energy_error = abs(solution.energy - branch.energy) / abs(branch.energy)
            if save_fields:
                field, _ = reconstruct(comp, solution.coefficients)
                directory = self.root / "online" / storage.mu_dirname(key) / label.value
                result.field_dir = save_field(directory, field, label.value, key, extra={
                    "source": "reduced",
                    "n": comp.size,
                    "energy": solution.energy,
                    "iterations": solution.iterations,
                    "outcome": solution.outcome.value,
                })
            logger.info(
                f"{label.value} online at mu={key}: E={solution.energy:.10g}, "
                f"{solution.iterations} it, {solution.seconds * 1e3:.2f} ms, {solution.outcome.value}"
            )
            results.append(result)
        return results

    # ------------------------------------------------------------ diagram

    def diagram(
        self,
        mode: str = "adaptive",
        grid_spec: Optional[GridSpec] = None,
        iterations: Optional[int] = None,
        name: Optional[str] = None
    ) -> Tuple[PhaseDiagram, Path]:
        """Uniform sweep, or coarse sweep plus boundary refinement"""
        if mode not in ("uniform", "adaptive"):
            raise InvalidArgumentError(f"Diagram mode must be 'uniform' or 'adaptive', got '{mode}'")
        grid_spec = grid_spec or self.config.diagram.coarse
        iterations = self.config.diagram.iterations if iterations is None else iterations
        eps_values, alpha_values = grid_spec.expand()
        for mu in ((eps_values[0], alpha_values[0]), (eps_values[-1], alpha_values[-1])):
            self.check_mu(mu)

        classifier = PhaseClassifier(
            self.load_components(trained_labels(self.root) or None),
            self.solver.config,
            tie_tol=self.config.diagram.tie_tol,
        )
        result = uniform_diagram(classifier, eps_values, alpha_values, self.workers)
        if mode == "adaptive":
            result = refine_boundaries(result, classifier, iterations, self.workers)
        directory = self.root / "diagrams" / (name or mode)
        write_diagram(directory, result)
        logger.info(f"Wrote {len(result)} point(s) to {directory}")
        return result, directory

    # ------------------------------------------------------------ validate

    def validate(self, level: str) -> Tuple[ValidationReport, Path]:
        """Run one level and write reports/validate_<level>.json whatever the outcome"""
        components = self.load_components(trained_labels(self.root) or None) if level == "paper" else None
        report = run_validation(level, self.config, components)
        path = report.save(self.root)
        return report, path

    # ------------------------------------------------------------ export

    def _export_source(self, mu: Mu, label: StateLabel, source: str) -> FourierField:
        if source == "fom":
            branch = load_branch(self.root, mu, label, self.grid)
            if branch.field is None:
                raise ArtifactError(f"FOM {label.value} branch at mu={mu} has no stored field")
            return branch.field
        if source == "reduced":
            comp = self.load_components([label])[label]
            solution = online_solve(comp, mu, self.solver.config)
            return reconstruct(comp, solution.coefficients)[0]
        raise InvalidArgumentError(f"Export source must be 'fom' or 'reduced', got '{source}'")

    def export_field(
        self,
        mu,
        label: StateLabel,
        source: str = "reduced",
        extent: float = 60.0,
        resolution: int = 128,
        output: Optional[Path] = None
    ) -> Path:
        """Sample phi on the square [0, extent]^2 of the physical plane as x,y,phi CSV"""
        if resolution < 1 or extent <= 0:
            raise InvalidArgumentError("Export needs resolution >= 1 and extent > 0")
        key = self.check_mu(mu)
        field = self._export_source(key, label, source)
        axis = np.linspace(0.0, extent, resolution)
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        points = np.column_stack([xx.ravel(), yy.ravel()])
        phi = evaluate_quasiperiodic(field, points)
        path = Path(output) if output else (
            self.root / "exports" / f"{label.value}_{source}_{storage.mu_dirname(key)}.csv"
        )
        storage.write_csv(path, EXPORT_HEADER, np.column_stack([points, phi]))
        logger.info(f"Exported {points.shape[0]} sample(s) of {label.value} ({source}) to {path}")
        return path

    def export_diagram(self, name: str, output: Optional[Path] = None) -> Path:
        """Re-export a stored diagram as one CSV"""
        directory = self.root / "diagrams" / name
        if not (directory / "manifest.json").exists():
            raise ArtifactError(f"No diagram '{name}' under {self.root / 'diagrams'}")
        result = load_diagram(directory)
        path = Path(output) if output else self.root / "exports" / f"diagram_{name}.csv"
        storage.write_csv(path, DIAGRAM_HEADER, (p.to_row() for p in result.points))
        return path
