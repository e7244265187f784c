"""
Workbench configuration

A TOML file (sections model, grid, solver, training, diagram, paths,
parallel) validated by pydantic models. Environment variables
QMOR_<SECTION>_<FIELD> override file values; command-line flags override
both. QMOR_CONFIG names the file to read when none is given.
"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import toml
from pydantic import BaseModel, Field, ValidationError, field_validator

from qmor.errors import InvalidArgumentError
from qmor.fom.types import STATE_ORDER, Mu, SolverConfig, StateLabel, mu_key
from qmor.spectral.geometry import TWELVE_FOLD_Q, ProjectionSetup
from qmor.spectral.grid import SpectralGrid

logger = logging.getLogger(__name__)

CONFIG_ENV = "QMOR_CONFIG"
ENV_PREFIX = "QMOR_"
DEFAULT_CONFIG_PATH = os.getenv(CONFIG_ENV, "qmor.toml")


def parse_range(text: str) -> List[float]:
    """'start:step:stop' with inclusive stop, or a single value"""
    parts = [p.strip() for p in str(text).split(":")]
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise InvalidArgumentError(f"Bad range '{text}' (expected start:step:stop or a number)")
    if len(values) == 1:
        return values
    if len(values) != 3:
        raise InvalidArgumentError(f"Bad range '{text}' (expected start:step:stop)")
    start, step, stop = values
    if step <= 0 or stop < start:
        raise InvalidArgumentError(f"Bad range '{text}': need step > 0 and stop >= start")
    n = int(round((stop - start) / step)) + 1
    return [round(start + i * step, 12) for i in range(n)]


class GridSpec(BaseModel):
    """Cartesian parameter grid, one range per axis"""
    epsilon: str = Field(..., description="epsilon range start:step:stop")
    alpha: str = Field(..., description="alpha range start:step:stop")

    @field_validator("epsilon", "alpha")
    @classmethod
    def _check_range(cls, value: str) -> str:
        try:
            parse_range(value)
        except InvalidArgumentError as e:
            raise ValueError(str(e))
        return value

    def expand(self) -> Tuple[List[float], List[float]]:
        return parse_range(self.epsilon), parse_range(self.alpha)

    def points(self) -> List[Mu]:
        eps, alpha = self.expand()
        return [mu_key((e, a)) for e in eps for a in alpha]


TRAIN_GRID = GridSpec(epsilon="-0.0125:0.002:0.0515", alpha="0:0.05:1")
TEST_GRID = GridSpec(epsilon="-0.01:0.015:0.05", alpha="0.025:0.1:0.925")


class StateCaps(BaseModel):
    m: int = Field(..., ge=1, description="EIM size for g")
    n: int = Field(..., ge=1, description="Reduced basis size")
    l: int = Field(..., ge=1, description="EIM size for h")


def _default_caps() -> Dict[str, StateCaps]:
    table = {"QC": (20, 15), "C6": (10, 5), "LQ": (30, 15), "T6": (20, 10), "Lam": (10, 5)}
    return {label: StateCaps(m=m, n=n, l=m) for label, (m, n) in table.items()}


def _default_amplitudes() -> Dict[str, float]:
    # At (5e-6, 0.71) the QC seed at 0.3 decays below 0.1 u0 before settling
    return {"QC": 0.1}


class ModelSection(BaseModel):
    c: float = Field(50.0, gt=0, description="Energy penalty")
    q: float = Field(TWELVE_FOLD_Q, gt=1, description="Second length scale")
    u0: float = Field(0.3, ge=0, description="Seed amplitude")
    seed_amplitudes: Dict[str, float] = Field(
        default_factory=_default_amplitudes, description="Per-state seed amplitudes overriding u0"
    )

    @field_validator("seed_amplitudes")
    @classmethod
    def _known_states(cls, value: Dict[str, float]) -> Dict[str, float]:
        for name, amplitude in value.items():
            StateLabel.parse(name)
            if amplitude < 0:
                raise ValueError(f"Seed amplitude of {name} must be >= 0, got {amplitude}")
        return value

    def amplitudes(self) -> Dict[StateLabel, float]:
        return {StateLabel.parse(name): float(a) for name, a in self.seed_amplitudes.items()}

    def amplitude(self, label: StateLabel) -> float:
        return self.amplitudes().get(StateLabel(label), self.u0)


class GridSection(BaseModel):
    n_h: int = Field(32, ge=4, description="Modes per lifted dimension")

    @field_validator("n_h")
    @classmethod
    def _even(cls, value: int) -> int:
        if value % 2:
            raise ValueError(f"n_h must be even, got {value}")
        return value


class SolverSection(BaseModel):
    dt: float = Field(0.1, gt=0, description="Time step")
    tol: float = Field(1e-8, gt=0, description="Convergence threshold on the increment 2-norm")
    t_max: float = Field(3000.0, gt=0, description="Maximum simulated time")
    pti_delta: Optional[float] = Field(
        None, gt=0, description="Phase transition magnitude threshold (default 0.1 x seed amplitude)"
    )
    pti_stride: int = Field(10, ge=1, description="Steps between phase transition checks")
    divergence_limit: float = Field(1e6, gt=0, description="Abort when max |phihat| exceeds this")


class TrainingSection(BaseModel):
    eps_bounds: Tuple[float, float] = Field((-0.0125, 0.0515), description="Parameter domain in epsilon")
    alpha_bounds: Tuple[float, float] = Field((0.0, 1.0), description="Parameter domain in alpha")
    train: GridSpec = Field(default_factory=lambda: TRAIN_GRID.model_copy())
    test: GridSpec = Field(default_factory=lambda: TEST_GRID.model_copy())
    caps: Dict[str, StateCaps] = Field(default_factory=_default_caps)
    tol_eim: float = Field(1e-10, ge=0, description="EIM stopping tolerance")
    tol_rb: float = Field(1e-10, ge=0, description="Greedy stopping tolerance on the indicator")
    eim_stride: int = Field(1, ge=1, description="Use every k-th training parameter for EIM snapshots")

    @field_validator("caps")
    @classmethod
    def _known_states(cls, value: Dict[str, StateCaps]) -> Dict[str, StateCaps]:
        for name in value:
            StateLabel.parse(name)
        return value

    def caps_for(self, label: StateLabel) -> StateCaps:
        for name, caps in self.caps.items():
            if StateLabel.parse(name) == label:
                return caps
        raise InvalidArgumentError(f"No (M, N) caps configured for {label.value}")


class DiagramSection(BaseModel):
    coarse: GridSpec = Field(default_factory=lambda: TRAIN_GRID.model_copy())
    iterations: int = Field(3, ge=0, description="Boundary refinement iterations")
    tie_tol: float = Field(0.0, ge=0, description="Energies within this of the minimum count as tied")


class PathsSection(BaseModel):
    root: str = Field("./qmor-data", description="Artifact root directory")


class ParallelSection(BaseModel):
    workers: int = Field(1, ge=0, description="Worker threads for sweeps (0 = one per CPU)")


class WorkbenchConfig(BaseModel):
    model: ModelSection = Field(default_factory=ModelSection)
    grid: GridSection = Field(default_factory=GridSection)
    solver: SolverSection = Field(default_factory=SolverSection)
    training: TrainingSection = Field(default_factory=TrainingSection)
    diagram: DiagramSection = Field(default_factory=DiagramSection)
    paths: PathsSection = Field(default_factory=PathsSection)
    parallel: ParallelSection = Field(default_factory=ParallelSection)

    @property
    def root(self) -> Path:
        return Path(self.paths.root)

    def setup(self) -> ProjectionSetup:
        return ProjectionSetup(q=self.model.q)

    def build_grid(self) -> SpectralGrid:
        return SpectralGrid(self.setup(), self.grid.n_h)

    def solver_config(self) -> SolverConfig:
        s = self.solver
        config = SolverConfig(
            dt=s.dt, tol=s.tol, t_max=s.t_max, pti_delta=s.pti_delta,
            pti_stride=s.pti_stride, divergence_limit=s.divergence_limit,
        )
        for label in STATE_ORDER:
            u0 = self.model.amplitude(label)
            if u0 > 0 and s.tol >= u0:
                raise InvalidArgumentError(f"solver.tol={s.tol} must be below the {label.value} seed amplitude {u0}")
        return config

    def in_domain(self, mu) -> bool:
        (e0, e1), (a0, a1) = self.training.eps_bounds, self.training.alpha_bounds
        return e0 <= mu[0] <= e1 and a0 <= mu[1] <= a1

    def check_mu(self, mu, strict: bool = False) -> Mu:
        """Out-of-domain parameters raise in strict mode, warn otherwise"""
        key = mu_key(mu)
        if not self.in_domain(key):
            message = (
                f"mu={key} outside the domain {self.training.eps_bounds} x {self.training.alpha_bounds}"
            )
            if strict:
                raise InvalidArgumentError(message)
            logger.warning(message)
        return key

    def eim_parameters(self) -> List[Mu]:
        return self.training.train.points()[::self.training.eim_stride]


def env_overrides(environ: Mapping[str, str]) -> Dict[str, Dict[str, str]]:
    """QMOR_SOLVER_DT=0.05 -> {'solver': {'dt': '0.05'}} for scalar fields"""
    out: Dict[str, Dict[str, str]] = {}
    for section, model in WorkbenchConfig.model_fields.items():
        section_model = model.annotation
        for name, info in section_model.model_fields.items():
            if info.annotation not in (int, float, str, Optional[float]):
                continue
            key = f"{ENV_PREFIX}{section.upper()}_{name.upper()}"
            if key in environ:
                out.setdefault(section, {})[name] = environ[key]
    return out


def _merge(base: Dict[str, Any], overrides: Dict[str, Dict[str, Any]]) -> Dict[str, Any]:
    merged = {k: (dict(v) if isinstance(v, dict) else v) for k, v in base.items()}
    for section, values in overrides.items():
        merged.setdefault(section, {}).update(values)
    return merged


def load_config(
    path: Optional[Path] = None,
    environ: Optional[Mapping[str, str]] = None,
    overrides: Optional[Dict[str, Dict[str, Any]]] = None
) -> WorkbenchConfig:
    """File (if any), then environment, then explicit overrides"""
    environ = os.environ if environ is None else environ
    data: Dict[str, Any] = {}
    if path is None and CONFIG_ENV in environ:
        path = Path(environ[CONFIG_ENV])
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise InvalidArgumentError(f"Config file not found: {path}")
        try:
            data = toml.load(path)
        except toml.TomlDecodeError as e:
            raise InvalidArgumentError(f"Bad config file {path}: {e}")
        logger.debug(f"Loaded config from {path}")
    data = _merge(data, env_overrides(environ))
    if overrides:
        data = _merge(data, overrides)
    try:
        return WorkbenchConfig.model_validate(data)
    except ValidationError as e:
        raise InvalidArgumentError(f"Invalid configuration: {e}")


def save_config(config: WorkbenchConfig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        toml.dump(config.model_dump(mode="json"), f)
    return path

