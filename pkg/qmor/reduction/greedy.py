"""
Offline training: EIM from the snapshot pool, then the phase-transition
guided greedy that grows one reduced component per state.
"""

import logging
import time
from typing import Dict, List, Sequence, Tuple

import numpy as np

from qmor.errors import ComponentUntrainableError, QmorError
from qmor.fom.pool import SnapshotPool
from qmor.fom.solver import FullOrderSolver
from qmor.fom.types import Mu, StateLabel, mu_key
from qmor.parallel import parallel_map
from qmor.reduction.component import ReducedComponent
from qmor.reduction.eim import EimComponent, EimSnapshot, EimTarget, evaluate_target, train_eim
from qmor.reduction.online import error_indicator, online_solve, relative_error
from qmor.spectral.transforms import to_physical

logger = logging.getLogger(__name__)


def fill_pool(pool: SnapshotPool, solver: FullOrderSolver, mus: Sequence, workers: int = 1) -> None:
    """Solve every missing parameter of a sweep into the pool"""
    missing = [mu_key(mu) for mu in mus if mu not in pool]
    if not missing:
        return
    logger.info(f"Running the FOM at {len(missing)} parameter(s) with {workers} worker(s)")
    started = time.perf_counter()
    parallel_map(lambda mu: pool.pss(mu, solver), missing, workers)
    logger.info(f"FOM sweep finished in {time.perf_counter() - started:.1f}s")


def eim_snapshots(
    pool: SnapshotPool,
    label: StateLabel,
    mus: Sequence,
    solver: FullOrderSolver,
    target: EimTarget
) -> List[EimSnapshot]:
    """Target values of every converged label-branch among mus"""
    snaps = []
    for branch in pool.branches(label, mus):
        field = pool.field(branch.mu, label, solver.grid)
        if field is None:
            continue
        phi = to_physical(field).flat
        snaps.append((branch.mu, evaluate_target(target, phi, branch.mu[1])))
    return snaps


def train_component_eims(
    label: StateLabel,
    pool: SnapshotPool,
    mus: Sequence,
    solver: FullOrderSolver,
    m_max: int,
    l_max: int,
    tol_eim: float
) -> Tuple[EimComponent, EimComponent]:
    """g then h, one snapshot set in memory at a time"""
    trained = []
    for target, size in ((EimTarget.G, m_max), (EimTarget.H, l_max)):
        snaps = eim_snapshots(pool, label, mus, solver, target)
        if not snaps:
            raise ComponentUntrainableError(label.value)
        logger.info(f"Training {label.value}/{target.value} EIM on {len(snaps)} snapshot(s)")
        trained.append(train_eim(target, label, snaps, size, tol_eim, overwrite=True))
        del snaps
    return trained[0], trained[1]


def _sweep(
    comp: ReducedComponent,
    train_set: List[Mu],
    solver: FullOrderSolver,
    workers: int
) -> np.ndarray:
    """Error indicator at every training parameter; inf where the online solve fails"""
    def indicator(mu: Mu) -> float:
        try:
            solution = online_solve(comp, mu, solver.config)
            return error_indicator(comp, solution, mu)
        except QmorError as e:
            logger.warning(f"{comp.label.value} online solve failed at mu={mu}: {e}")
            return float("inf")

    return np.array(parallel_map(indicator, train_set, workers))


def _true_error(comp: ReducedComponent, pool: SnapshotPool, train_set: List[Mu], solver: FullOrderSolver) -> float:
    """Worst relative solution error over the label-branches already in the pool"""
    worst = 0.0
    for branch in pool.branches(comp.label, train_set):
        reference = pool.field(branch.mu, comp.label, solver.grid)
        try:
            solution = online_solve(comp, branch.mu, solver.config)
        except QmorError:
            return float("inf")
        worst = max(worst, relative_error(comp, solution.coefficients, reference))
    return worst


def greedy_offline(
    label: StateLabel,
    train_set: Sequence,
    pool: SnapshotPool,
    solver: FullOrderSolver,
    eim_g: EimComponent,
    eim_h: EimComponent,
    n_max: int,
    tol_rb: float,
    workers: int = 1
) -> ReducedComponent:
    """
    Grow the label's reduced space one FOM snapshot at a time.

    Candidates are visited in decreasing indicator order; a candidate whose
    phase-steady set has no label-branch is pruned for good.
    """
    label = StateLabel(label)
    train_set = [mu_key(mu) for mu in train_set]
    comp = ReducedComponent(label, solver.grid, eim_g, eim_h, solver.c, solver.config.dt, solver.amplitude(label))
    started = time.perf_counter()

    first = None
    for mu in train_set:
        pss = pool.pss(mu, solver)
        if label in pss:
            first = mu
            break
        comp.pruned_params.append(mu)
    if first is None:
        raise ComponentUntrainableError(label.value)
    comp.add_snapshot(pool.field(first, label, solver.grid), first)

    while True:
        indicators = _sweep(comp, train_set, solver, workers)
        worst = float(np.max(indicators))
        true_error = _true_error(comp, pool, train_set, solver)
        comp.history.append({
            "N": comp.size,
            "worst_indicator": worst,
            "worst_true_error": true_error,
            "epsilon": comp.selected_params[-1][0],
            "alpha": comp.selected_params[-1][1],
            "seconds": time.perf_counter() - started,
        })
        logger.info(
            f"{label.value} greedy N={comp.size}: worst indicator {worst:.3e}, worst true error {true_error:.3e}"
        )
        if comp.size >= n_max or worst < tol_rb:
            break

        added = False
        excluded = set(comp.selected_params) | set(comp.pruned_params)
        for i in np.argsort(-indicators, kind="stable"):
            mu = train_set[int(i)]
            if mu in excluded:
                continue
            pss = pool.pss(mu, solver)
            if label not in pss:
                comp.pruned_params.append(mu)
                logger.warning(f"{label.value}: pruned mu={mu} (no {label.value}-branch)")
                continue
            if comp.add_snapshot(pool.field(mu, label, solver.grid), mu):
                added = True
                break
            comp.pruned_params.append(mu)
        if not added:
            logger.info(f"{label.value}: no admissible parameter left, stopping at N={comp.size}")
            break

    logger.info(f"Trained {comp} in {time.perf_counter() - started:.1f}s")
    return comp


def evaluate_testing_errors(
    comp: ReducedComponent,
    test_set: Sequence,
    pool: SnapshotPool,
    solver: FullOrderSolver,
    workers: int = 1
) -> List[Dict[str, float]]:
    """
    Worst relative solution and energy errors over the test parameters that
    carry a label-branch, for every nested size n = 1..N.
    """
    comp.require_trained()
    test_set = [mu_key(mu) for mu in test_set]
    fill_pool(pool, solver, test_set, workers)
    references = [
        (b.mu, pool.field(b.mu, comp.label, solver.grid), b.energy)
        for b in pool.branches(comp.label, test_set)
    ]
    if not references:
        logger.warning(f"No {comp.label.value}-branch in the test set")
        return []

    rows = []
    for n in range(1, comp.size + 1):
        sub = comp.truncate(n)

        def errors(ref):
            mu, field, energy = ref
            try:
                solution = online_solve(sub, mu, solver.config)
            except QmorError:
                return float("inf"), float("inf")
            e_err = abs(solution.energy - energy) / abs(energy) if energy else abs(solution.energy)
            return relative_error(sub, solution.coefficients, field), e_err

        measured = parallel_map(errors, references, workers)
        rows.append({
            "N": n,
            "test_solution_error": max(m[0] for m in measured),
            "test_energy_error": max(m[1] for m in measured),
        })
        logger.debug(f"{comp.label.value} test errors at n={n}: {rows[-1]}")
    return rows
