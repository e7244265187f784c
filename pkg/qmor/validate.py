"""
Validation suites and brute-force oracles

Three levels:
    unit   - contracts: seeds, shells, multiplier values, PTI, tie-breaking, EIM, config
    oracle - FFT paths against O(N^2) direct sums on N_H = 4..8 grids
    paper  - reference-parameter spot checks with trained components (needs artifacts)

The oracles are plain functions so the test-suite can call them too.
"""

import json
import logging
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from qmor import storage
from qmor.errors import InvalidArgumentError, QmorError
from qmor.fom.seeds import EXPECTED_SIZES, Q_SHELL, UNIT_SHELL, prominent_modes, seed_field, seed_state
from qmor.fom.solver import FullOrderSolver, free_energy, phase_transition_indicator, step
from qmor.fom.types import STATE_ORDER, ModelParameters, StateLabel
from qmor.reduction.component import ReducedComponent, assemble_matrices
from qmor.reduction.eim import EimTarget, train_eim
from qmor.reduction.basis import gram_schmidt, orthonormality_defect
from qmor.reduction.online import online_solve, relative_error, residual_norm
from qmor.spectral.field import FourierField, PhysicalField
from qmor.spectral.geometry import ProjectionSetup
from qmor.spectral.grid import SpectralGrid
from qmor.spectral.transforms import linear_multiplier, reflect, to_physical, to_spectral

logger = logging.getLogger(__name__)

LEVELS = ("unit", "oracle", "paper")

# Reference parameters: (mu, phase, (M, N), solution error, energy error)
REFERENCE_POINTS = [
    ((5e-6, np.sqrt(2.0) / 2.0), StateLabel.QC, (20, 15), 4.67e-6, 2.93e-10),
    ((0.05, 1.0), StateLabel.C6, (10, 5), 3.02e-6, 4.52e-11),
    ((0.005, 0.6), StateLabel.LQ, (30, 15), 3.53e-5, 7.70e-9),
    ((0.05, 0.3), StateLabel.T6, (20, 10), 3.17e-5, 1.83e-9),
    ((0.05, 0.1), StateLabel.LAM, (10, 5), 2.75e-5, 3.02e-9),
]
SOLUTION_BAND = 10.0
ENERGY_BAND = 100.0
MIN_SPEEDUP = 100.0


# ---------------------------------------------------------------- oracles

def random_hermitian(grid: SpectralGrid, rng: np.random.Generator, scale: float = 0.1) -> FourierField:
    """Spectrum of a random real field, so Hermitian by construction"""
    return to_spectral(PhysicalField(scale * rng.standard_normal(grid.shape), grid))


def direct_synthesis(field: FourierField) -> np.ndarray:
    """phi(x) = sum_H phihat(H) exp(i H.x) by an explicit N x N matrix"""
    grid = field.grid
    modes = grid.mode_vectors(np.arange(grid.total_modes)).astype(float)
    positions = np.stack(np.unravel_index(np.arange(grid.total_modes), grid.shape), axis=-1)
    x = 2.0 * np.pi * positions / grid.n_h
    values = np.exp(1j * x @ modes.T) @ field.flat
    return values.reshape(grid.shape)


def direct_convolution(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """sum over H1 + H2 = H (mod N_H) of a(H1) b(H2), one shifted copy per H1"""
    out = np.zeros(a.shape, dtype=np.complex128)
    for position in np.ndindex(a.shape):
        if a[position] != 0:
            out += a[position] * np.roll(b, position, axis=tuple(range(a.ndim)))
    return out


def direct_nonlinear(field: FourierField, alpha: float) -> np.ndarray:
    square = direct_convolution(field.coefficients, field.coefficients)
    cube = direct_convolution(square, field.coefficients)
    return alpha * square - cube


def direct_step(field: FourierField, params: ModelParameters, dt: float) -> np.ndarray:
    A = linear_multiplier(field.grid, params.c, params.q)
    G = direct_nonlinear(field, params.alpha)
    return ((1.0 / dt + params.epsilon) * field.coefficients + G) / (1.0 / dt + A)


def direct_free_energy(field: FourierField, params: ModelParameters) -> float:
    """Quadratic sum plus cubic and quartic lattice sums over H1 + ... = 0"""
    A = linear_multiplier(field.grid, params.c, params.q)
    phi = field.coefficients
    square = direct_convolution(phi, phi)
    cubic = np.sum(square * reflect(phi))
    quartic = np.sum(square * reflect(square))
    quadratic = 0.5 * np.sum((A - params.epsilon) * np.abs(phi) ** 2)
    return float(np.real(quadratic - params.alpha / 3.0 * cubic + 0.25 * quartic))


def direct_residual_norm(comp: ReducedComponent, coefficients: np.ndarray, d: np.ndarray, epsilon: float) -> float:
    """||(A - eps) W c - F(V_g^T d)|| on the full grid"""
    A = linear_multiplier(comp.grid, comp.c, comp.q).reshape(-1)
    interpolant = (comp.eim_g.basis.T @ d).reshape(comp.grid.shape)
    G = np.fft.fftn(interpolant, norm="forward").reshape(-1)
    r = (A - epsilon) * (comp.W @ coefficients) - G
    return float(np.linalg.norm(r))


def toy_component(
    rng: np.random.Generator,
    n_h: int = 4,
    n: int = 3,
    m: int = 4,
    c: float = 1.0
) -> ReducedComponent:
    """Random-basis component for algebraic checks"""
    grid = SpectralGrid(ProjectionSetup(), n_h)
    snaps = [((0.0, float(i)), rng.standard_normal(grid.total_modes)) for i in range(m + 2)]
    eim_g = train_eim(EimTarget.G, StateLabel.QC, snaps, m)
    eim_h = train_eim(EimTarget.H, StateLabel.QC, snaps, m)
    comp = ReducedComponent(StateLabel.QC, grid, eim_g, eim_h, c=c, dt=0.1, u0=0.3)
    for i in range(n):
        comp.add_snapshot(random_hermitian(grid, rng), (0.0, float(i)))
    return comp


# ---------------------------------------------------------------- reporting

@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: Optional[float] = None
    threshold: Optional[float] = None
    seconds: float = 0.0
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class ValidationReport:
    level: str
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "level": self.level,
            "passed": self.passed,
            "created_at": storage.utc_now(),
            "checks": [c.to_dict() for c in self.checks],
        }

    def save(self, root: Path) -> Path:
        path = Path(root) / "reports" / f"validate_{self.level}.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)
        return path


def _run(name: str, fn: Callable[[], CheckResult]) -> CheckResult:
    started = time.perf_counter()
    try:
        result = fn()
    except Exception as e:
        logger.error(f"Check {name} raised: {e}")
        result = CheckResult(name=name, passed=False, detail=f"{type(e).__name__}: {e}")
    result.name = name
    result.seconds = time.perf_counter() - started
    logger.info(f"{'PASS' if result.passed else 'FAIL'} {name} (measured={result.measured})")
    return result


def _below(measured: float, threshold: float, detail: str = "") -> CheckResult:
    return CheckResult(name="", passed=bool(measured <= threshold), measured=float(measured), threshold=threshold, detail=detail)


# ---------------------------------------------------------------- unit level

def check_seed_sets() -> CheckResult:
    bad = []
    for label in STATE_ORDER:
        modes = set(prominent_modes(label))
        if len(modes) != EXPECTED_SIZES[label]:
            bad.append(f"{label.value}: {len(modes)} modes")
        if any(tuple(-h for h in mode) not in modes for mode in modes):
            bad.append(f"{label.value}: not closed under negation")
    return CheckResult(name="", passed=not bad, measured=float(len(bad)), threshold=0.0, detail="; ".join(bad))


def check_resonant_shells() -> CheckResult:
    setup = ProjectionSetup()
    worst = max(
        [abs(setup.k_squared(h) - 1.0) for h in UNIT_SHELL]
        + [abs(setup.k_squared(h) - setup.q ** 2) for h in Q_SHELL]
    )
    return _below(worst, 1e-12)


def check_multiplier_values() -> CheckResult:
    grid = SpectralGrid(ProjectionSetup(), 4)
    A = linear_multiplier(grid, 1.0, grid.setup.q).reshape(-1)
    errors = [
        abs(A[grid.flat_index((1, 0, 0, 0))]),
        abs(A[grid.flat_index((1, 1, 0, 0))]),
        abs(A[grid.flat_index((0, 0, 0, 0))] - (2.0 + np.sqrt(3.0)) ** 2),
    ]
    return _below(max(errors), 1e-12)


def check_seed_fields() -> CheckResult:
    grid = SpectralGrid(ProjectionSetup(), 4)
    lam = np.count_nonzero(seed_field(grid, seed_state(StateLabel.LAM, 0.3)).flat)
    qc = np.count_nonzero(seed_field(grid, seed_state(StateLabel.QC, 0.3)).flat)
    zero = np.count_nonzero(seed_field(grid, seed_state(StateLabel.QC, 0.0)).flat)
    ok = lam == 2 and qc == 24 and zero == 0
    return CheckResult(name="", passed=ok, detail=f"Lam={lam}, QC={qc}, u0=0 -> {zero}")


def check_pti_contract() -> CheckResult:
    grid = SpectralGrid(ProjectionSetup(), 4)
    f0 = seed_field(grid, seed_state(StateLabel.LQ, 0.3))
    doubled = FourierField(2.0 * f0.coefficients, grid)
    dropped = f0.copy()
    dropped.flat[grid.flat_index((0, 1, 0, 0))] = 0.0
    values = (
        phase_transition_indicator(f0, f0, 0.03),
        phase_transition_indicator(f0, doubled, 0.03),
        phase_transition_indicator(f0, dropped, 0.03),
    )
    return CheckResult(name="", passed=values == (0, 0, 1), detail=f"indicators {values}")


def check_tie_break() -> CheckResult:
    from qmor.diagram.classify import select_stable
    energies = dict(zip(STATE_ORDER, [1.0, 1.0, 2.0, 3.0, 4.0]))
    label, tie = select_stable(energies)
    return CheckResult(name="", passed=(label == StateLabel.QC and tie), detail=f"{label}, tie={tie}")


def check_zero_fixed_point() -> CheckResult:
    grid = SpectralGrid(ProjectionSetup(), 4)
    out = step(FourierField.zeros(grid), ModelParameters(c=50.0, q=grid.setup.q, epsilon=0.01, alpha=0.5), 0.1)
    return _below(out.max_abs(), 0.0)


def check_eim_exactness() -> CheckResult:
    rng = np.random.default_rng(7)
    snaps = [((0.0, float(i)), rng.standard_normal(256)) for i in range(8)]
    eim = train_eim(EimTarget.G, StateLabel.QC, snaps, 6)
    Q = eim.interp_matrix
    worst = float(np.max(np.abs(np.triu(Q, 1))) + np.max(np.abs(np.diag(Q) - 1.0)))
    for j in range(eim.size):
        coeff = eim.online_coefficients(eim.basis[j, eim.points])
        worst = max(worst, float(np.max(np.abs(coeff - np.eye(eim.size)[j]))))
    return _below(worst, 1e-12)


def check_orthonormality() -> CheckResult:
    rng = np.random.default_rng(11)
    grid = SpectralGrid(ProjectionSetup(), 4)
    W = None
    for _ in range(6):
        w, _ = gram_schmidt(W, random_hermitian(grid, rng).flat)
        W = w[:, None] if W is None else np.column_stack([W, w])
    return _below(orthonormality_defect(W), 1e-12)


def check_config_round_trip() -> CheckResult:
    from qmor.config import WorkbenchConfig, load_config, save_config
    config = WorkbenchConfig()
    with tempfile.TemporaryDirectory() as tmp:
        path = save_config(config, Path(tmp) / "qmor.toml")
        loaded = load_config(path, environ={})
    train_ok = len(loaded.training.train.points()) == 33 * 21
    test_ok = len(loaded.training.test.points()) == 5 * 10
    return CheckResult(name="", passed=(loaded == config and train_ok and test_ok))


UNIT_CHECKS = {
    "seed_sets": check_seed_sets,
    "resonant_shells": check_resonant_shells,
    "multiplier_values": check_multiplier_values,
    "seed_fields": check_seed_fields,
    "pti_contract": check_pti_contract,
    "tie_break": check_tie_break,
    "zero_fixed_point": check_zero_fixed_point,
    "eim_exactness": check_eim_exactness,
    "orthonormality": check_orthonormality,
    "config_round_trip": check_config_round_trip,
}


# ---------------------------------------------------------------- oracle level

def check_synthesis_oracle() -> CheckResult:
    rng = np.random.default_rng(1)
    grid = SpectralGrid(ProjectionSetup(), 4)
    field = random_hermitian(grid, rng)
    return _below(float(np.max(np.abs(to_physical(field).values - direct_synthesis(field)))), 1e-12)


def check_parseval() -> CheckResult:
    rng = np.random.default_rng(2)
    grid = SpectralGrid(ProjectionSetup(), 8)
    p = PhysicalField(rng.standard_normal(grid.shape), grid)
    lhs = float(np.mean(p.values ** 2))
    rhs = float(np.sum(np.abs(to_spectral(p).coefficients) ** 2))
    return _below(abs(lhs - rhs) / lhs, 1e-10)


def check_convolution_oracle() -> CheckResult:
    rng = np.random.default_rng(3)
    grid = SpectralGrid(ProjectionSetup(), 4)
    a, b = random_hermitian(grid, rng), random_hermitian(grid, rng)
    fft_path = to_spectral(PhysicalField(to_physical(a).values * to_physical(b).values, grid)).coefficients
    return _below(float(np.max(np.abs(fft_path - direct_convolution(a.coefficients, b.coefficients)))), 1e-12)


def check_step_oracle() -> CheckResult:
    rng = np.random.default_rng(4)
    grid = SpectralGrid(ProjectionSetup(), 4)
    worst = 0.0
    for _ in range(20):
        params = ModelParameters(c=50.0, q=grid.setup.q, epsilon=rng.uniform(-0.0125, 0.0515), alpha=rng.uniform(0, 1))
        field = random_hermitian(grid, rng)
        diff = step(field, params, 0.1).coefficients - direct_step(field, params, 0.1)
        worst = max(worst, float(np.max(np.abs(diff))))
    return _below(worst, 1e-12)


def check_hermitian_step() -> CheckResult:
    rng = np.random.default_rng(5)
    grid = SpectralGrid(ProjectionSetup(), 4)
    params = ModelParameters(c=50.0, q=grid.setup.q, epsilon=0.02, alpha=0.7)
    field = random_hermitian(grid, rng)
    for _ in range(5):
        field = step(field, params, 0.1)
    return _below(field.hermitian_defect(), 1e-15)


def check_two_mode_energy() -> CheckResult:
    rng = np.random.default_rng(6)
    # cos^4 has frequency 4, which only N_H >= 8 samples without aliasing
    grid = SpectralGrid(ProjectionSetup(), 8)
    worst = 0.0
    for _ in range(10):
        eps, a, alpha = rng.uniform(-0.05, 0.05), rng.uniform(0.05, 0.5), rng.uniform(0, 1)
        field = FourierField.zeros(grid)
        field.flat[grid.flat_index((1, 0, 0, 0))] = a
        field.flat[grid.flat_index((-1, 0, 0, 0))] = a
        params = ModelParameters(c=50.0, q=grid.setup.q, epsilon=eps, alpha=alpha)
        worst = max(worst, abs(free_energy(field, params) - (-eps * a * a + 1.5 * a ** 4)))
    return _below(worst, 1e-12)


def check_energy_oracle() -> CheckResult:
    rng = np.random.default_rng(8)
    grid = SpectralGrid(ProjectionSetup(), 8)
    params = ModelParameters(c=50.0, q=grid.setup.q, epsilon=5e-6, alpha=np.sqrt(2.0) / 2.0)
    field = random_hermitian(grid, rng, scale=0.05)
    fast, slow = free_energy(field, params), direct_free_energy(field, params)
    return _below(abs(fast - slow) / abs(slow), 1e-10)


def check_residual_oracle() -> CheckResult:
    rng = np.random.default_rng(9)
    comp = toy_component(rng)
    worst = 0.0
    for _ in range(100):
        c = rng.standard_normal(comp.size)
        d = rng.standard_normal(comp.eim_g.size)
        eps = rng.uniform(-0.0125, 0.0515)
        direct = direct_residual_norm(comp, c, d, eps)
        worst = max(worst, abs(residual_norm(comp, c, d, eps) - direct) / direct)
    return _below(worst, 1e-10)


def check_incremental_assembly() -> CheckResult:
    rng = np.random.default_rng(10)
    comp = toy_component(rng, n=4)
    worst = 0.0
    for name, reference in assemble_matrices(comp).items():
        scale = max(1.0, float(np.max(np.abs(reference))))
        worst = max(worst, float(np.max(np.abs(getattr(comp, name) - reference))) / scale)
    return _below(worst, 1e-12)


ORACLE_CHECKS = {
    "synthesis_oracle": check_synthesis_oracle,
    "parseval": check_parseval,
    "convolution_oracle": check_convolution_oracle,
    "step_oracle": check_step_oracle,
    "hermitian_step": check_hermitian_step,
    "two_mode_energy": check_two_mode_energy,
    "energy_oracle": check_energy_oracle,
    "residual_oracle": check_residual_oracle,
    "incremental_assembly": check_incremental_assembly,
}


# ---------------------------------------------------------------- paper level

def paper_checks(config, components: Dict[StateLabel, ReducedComponent]) -> List[CheckResult]:
    """Reference-parameter label, error and speedup checks"""
    from qmor.diagram.classify import PhaseClassifier

    grid = next(iter(components.values())).grid
    solver_config = config.solver_config()
    solver = FullOrderSolver(
        grid, c=config.model.c, u0=config.model.u0, config=solver_config,
        seed_amplitudes=config.model.amplitudes(),
    )
    classifier = PhaseClassifier(components, solver_config, tie_tol=config.diagram.tie_tol)
    results = []
    for mu, phase, _, phi_ref, energy_ref in REFERENCE_POINTS:
        tag = f"{phase.value}@({mu[0]:g},{mu[1]:.4g})"

        def label_check(mu=mu, phase=phase):
            point = classifier.classify(mu)
            return CheckResult(name="", passed=point.label == phase, detail=f"classified {point.label_text}")

        results.append(_run(f"phase_{tag}", label_check))
        if phase not in components:
            results.append(CheckResult(name=f"errors_{tag}", passed=False, detail="component not trained"))
            continue

        comp = components[phase]
        branch = None
        try:
            branch = solver.solve_branch(mu, solver.seed(phase))
        except QmorError as e:
            results.append(CheckResult(name=f"errors_{tag}", passed=False, detail=str(e)))
            continue
        solution = online_solve(comp, mu, solver_config)
        phi_err = relative_error(comp, solution.coefficients, branch.field)
        results.append(CheckResult(
            name=f"solution_error_{tag}", passed=phi_err <= SOLUTION_BAND * phi_ref,
            measured=phi_err, threshold=SOLUTION_BAND * phi_ref,
        ))
        if branch.energy is not None:
            e_err = abs(solution.energy - branch.energy) / abs(branch.energy)
            results.append(CheckResult(
                name=f"energy_error_{tag}", passed=e_err <= ENERGY_BAND * energy_ref,
                measured=e_err, threshold=ENERGY_BAND * energy_ref,
            ))
        speedup = branch.seconds / max(solution.seconds, 1e-12)
        results.append(CheckResult(
            name=f"speedup_{tag}", passed=speedup >= MIN_SPEEDUP, measured=speedup, threshold=MIN_SPEEDUP,
            detail=f"FOM {branch.seconds:.3g}s, online {solution.seconds:.3g}s, outcome {branch.outcome.value}",
        ))
    return results


def run_validation(level: str, config=None, components: Optional[Dict[StateLabel, ReducedComponent]] = None) -> ValidationReport:
    """Run one level; unit and oracle need no artifacts"""
    if level not in LEVELS:
        raise InvalidArgumentError(f"Unknown validation level '{level}' (expected one of {LEVELS})")
    report = ValidationReport(level=level)
    if level == "unit":
        report.checks = [_run(name, fn) for name, fn in UNIT_CHECKS.items()]
    elif level == "oracle":
        report.checks = [_run(name, fn) for name, fn in ORACLE_CHECKS.items()]
    else:
        if config is None or not components:
            raise InvalidArgumentError("Paper-level validation needs a config and trained components")
        report.checks = paper_checks(config, components)
    passed = sum(c.passed for c in report.checks)
    logger.info(f"Validation '{level}': {passed}/{len(report.checks)} checks passed")
    return report
