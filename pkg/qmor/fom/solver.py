"""
Full-order LP solver

Semi-implicit pseudospectral gradient flow on the lifted 4D lattice: the
stiff linear multiplier is implicit, the polynomial nonlinearity explicit
and evaluated in physical space. One seed per candidate state; branches
whose spectral signature changes are discarded as phase-transitioned.
"""

import logging
import time
from typing import Iterable, Mapping, Optional

import numpy as np

from qmor.errors import NumericalOverflowError, QmorError
from qmor.fom.seeds import seed_field, seed_state
from qmor.fom.types import (
    STATE_ORDER, Branch, BranchOutcome, ModelParameters, PhaseSteadySolutionSet,
    SeedState, SolverConfig, StateLabel, mu_key
)
from qmor.parallel import parallel_map
from qmor.spectral.field import FourierField, PhysicalField
from qmor.spectral.grid import SpectralGrid
from qmor.spectral.transforms import hermitian_part, linear_multiplier, to_physical, to_spectral

logger = logging.getLogger(__name__)


def nonlinear_force(phi: np.ndarray, alpha: float) -> np.ndarray:
    """g(phi) = alpha phi^2 - phi^3"""
    return alpha * phi * phi - phi * phi * phi


def energy_density(phi: np.ndarray, alpha: float) -> np.ndarray:
    """h(phi) = -(alpha/3) phi^3 + phi^4 / 4"""
    phi3 = phi * phi * phi
    return -(alpha / 3.0) * phi3 + 0.25 * phi3 * phi


def _check_finite(field: FourierField) -> None:
    flat = field.flat
    bad = ~np.isfinite(flat)
    if bad.any():
        first = int(np.flatnonzero(bad)[0])
        raise NumericalOverflowError("Non-finite Fourier coefficient", mode=field.grid.mode_vector(first))


def _multiplier(field: FourierField, params: ModelParameters, multiplier: Optional[np.ndarray]) -> np.ndarray:
    if multiplier is None:
        return linear_multiplier(field.grid, params.c, params.q)
    return multiplier


def step(
    field: FourierField,
    params: ModelParameters,
    dt: float,
    multiplier: Optional[np.ndarray] = None
) -> FourierField:
    """
    One implicit-explicit step:
    phihat' = [(1/dt + eps) phihat + G] / (1/dt + A), G = F(alpha phi^2 - phi^3).
    """
    _check_finite(field)
    A = _multiplier(field, params, multiplier)
    phi = to_physical(field).values
    G = to_spectral(PhysicalField(nonlinear_force(phi, params.alpha), field.grid)).coefficients
    inv_dt = 1.0 / dt
    updated = ((inv_dt + params.epsilon) * field.coefficients + G) / (inv_dt + A)
    return FourierField(hermitian_part(updated), field.grid)


def phase_transition_indicator(reference: FourierField, candidate: FourierField, delta: float) -> int:
    """0 when both fields have the same set of modes above delta, 1 otherwise"""
    before = np.abs(reference.coefficients) > delta
    after = np.abs(candidate.coefficients) > delta
    return 0 if np.array_equal(before, after) else 1


def free_energy(
    field: FourierField,
    params: ModelParameters,
    multiplier: Optional[np.ndarray] = None
) -> float:
    """Free energy of a Hermitian field: quadratic part in Fourier space, polynomial part by quadrature"""
    _check_finite(field)
    A = _multiplier(field, params, multiplier)
    quadratic = 0.5 * float(np.sum((A - params.epsilon) * np.abs(field.coefficients) ** 2))
    phi = to_physical(field).values
    polynomial = float(np.mean(energy_density(phi, params.alpha)))
    energy = quadratic + polynomial
    if not np.isfinite(energy):
        raise NumericalOverflowError("Free energy is not finite")
    return energy


def steady_state_residual(
    field: FourierField,
    params: ModelParameters,
    multiplier: Optional[np.ndarray] = None
) -> float:
    """||(A - eps) phihat - G||_2, zero exactly at a steady state of the gradient flow"""
    A = _multiplier(field, params, multiplier)
    phi = to_physical(field).values
    G = to_spectral(PhysicalField(nonlinear_force(phi, params.alpha), field.grid)).coefficients
    return float(np.linalg.norm(((A - params.epsilon) * field.coefficients - G).ravel()))


class FullOrderSolver:
    """
    Evolves the five seeds of the LP model on one spectral grid.

    Grid and multiplier are shared read-only, so solve_branch may run
    concurrently for distinct (mu, seed) pairs.
    """

    def __init__(
        self,
        grid: SpectralGrid,
        c: float = 50.0,
        u0: float = 0.3,
        config: Optional[SolverConfig] = None,
        record_energy: bool = False,
        seed_amplitudes: Optional[Mapping[StateLabel, float]] = None
    ):
        self.grid = grid
        self.c = float(c)
        self.q = grid.setup.q
        self.u0 = float(u0)
        self.seed_amplitudes = {StateLabel(k): float(v) for k, v in (seed_amplitudes or {}).items()}
        self.config = config or SolverConfig()
        self.record_energy = record_energy
        self.multiplier = linear_multiplier(grid, self.c, self.q)
        self.multiplier.setflags(write=False)

    def parameters(self, mu) -> ModelParameters:
        eps, alpha = mu
        return ModelParameters(c=self.c, q=self.q, epsilon=float(eps), alpha=float(alpha))

    def amplitude(self, label: StateLabel) -> float:
        """Seed amplitude of a state, falling back to u0"""
        return self.seed_amplitudes.get(StateLabel(label), self.u0)

    def seed(self, label: StateLabel) -> SeedState:
        return seed_state(label, self.amplitude(label))

    def pti_delta(self, seed: SeedState) -> float:
        return self.config.threshold(seed.u0)

    def solve_branch(self, mu, seed: SeedState) -> Branch:
        """Evolve one seed until convergence, phase transition, or T"""
        cfg = self.config
        params = self.parameters(mu)
        delta = self.pti_delta(seed)
        if seed.u0 > 0 and cfg.tol >= seed.u0:
            logger.warning(f"tol={cfg.tol} is not below the seed amplitude u0={seed.u0}")

        started = time.perf_counter()
        initial = seed_field(self.grid, seed)
        current = initial
        trace = []
        outcome = BranchOutcome.MAX_ITERATIONS
        residual = float("inf")
        iteration = 0

        while True:
            try:
                updated = step(current, params, cfg.dt, self.multiplier)
            except NumericalOverflowError as e:
                raise NumericalOverflowError(str(e), mode=e.mode, iteration=iteration + 1)
            iteration += 1
            residual = float(np.linalg.norm((updated.coefficients - current.coefficients).ravel()))
            current = updated

            if not np.isfinite(residual) or current.max_abs() > cfg.divergence_limit:
                raise NumericalOverflowError(
                    f"Branch {seed.label.value} diverged at mu={tuple(mu)}", iteration=iteration
                )

            if residual < cfg.tol:
                if phase_transition_indicator(initial, current, delta):
                    outcome = BranchOutcome.PHASE_TRANSITIONED
                else:
                    outcome = BranchOutcome.CONVERGED
                break

            if iteration % cfg.pti_stride == 0:
                if phase_transition_indicator(initial, current, delta):
                    outcome = BranchOutcome.PHASE_TRANSITIONED
                    break
                if self.record_energy:
                    trace.append(free_energy(current, params, self.multiplier))

            if iteration >= cfg.max_steps:
                outcome = BranchOutcome.MAX_ITERATIONS
                break

        energy = None
        if outcome == BranchOutcome.CONVERGED:
            energy = free_energy(current, params, self.multiplier)

        branch = Branch(
            mu=mu_key(mu),
            seed=seed,
            outcome=outcome,
            iterations=iteration,
            residual=residual,
            field=current,
            energy=energy,
            seconds=time.perf_counter() - started,
            energy_trace=trace,
        )
        logger.debug(
            f"{seed.label.value} at mu={branch.mu}: {outcome.value} after {iteration} steps "
            f"(res={residual:.3e}, {branch.seconds:.2f}s)"
        )
        return branch

    def solve_all_branches(
        self,
        mu,
        labels: Optional[Iterable[StateLabel]] = None,
        workers: int = 1
    ) -> PhaseSteadySolutionSet:
        """Run every requested seed; keep converged, transition-free branches"""
        labels = list(labels) if labels is not None else list(STATE_ORDER)
        pss = PhaseSteadySolutionSet(mu=mu_key(mu))

        def run(label: StateLabel):
            try:
                return label, self.solve_branch(mu, self.seed(label)), None
            except QmorError as e:
                logger.error(f"FOM branch {label.value} failed at mu={pss.mu}: {e}")
                return label, None, str(e)

        results = parallel_map(run, labels, workers)

        for label, branch, error in results:
            if error is not None:
                pss.failures[label] = error
            else:
                pss.add(branch)

        kept = ", ".join(s.value for s in pss.labels) or "none"
        logger.info(f"PSS at mu={pss.mu}: {len(pss)} branch(es) kept [{kept}]")
        return pss
