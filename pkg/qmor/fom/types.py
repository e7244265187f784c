"""
Full-order model types

States, parameters, solver settings, branches and phase-steady solution sets.
"""

from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from qmor.errors import InvalidArgumentError
from qmor.spectral.field import FourierField


class StateLabel(str, Enum):
    """Candidate stable states of the 12-fold LP model"""
    QC = "QC"    # 12-fold quasicrystal
    C6 = "C6"    # 6-fold crystal
    LQ = "LQ"    # lamellar quasicrystal
    T6 = "T6"    # transformed 6-fold crystal
    LAM = "Lam"  # lamella

    @classmethod
    def parse(cls, text: str) -> "StateLabel":
        for label in cls:
            if label.value.lower() == str(text).strip().lower():
                return label
        raise InvalidArgumentError(f"Unknown state '{text}' (expected one of {[s.value for s in cls]})")


# Fixed order used for iteration and for breaking energy ties
STATE_ORDER: Tuple[StateLabel, ...] = (
    StateLabel.QC, StateLabel.C6, StateLabel.LQ, StateLabel.T6, StateLabel.LAM
)


class BranchOutcome(str, Enum):
    CONVERGED = "converged"
    PHASE_TRANSITIONED = "phase_transitioned"
    MAX_ITERATIONS = "max_iterations"


Mu = Tuple[float, float]

# Default PTI threshold relative to the seed amplitude
PTI_FRACTION = 0.1


def mu_key(mu) -> Mu:
    """Canonical (epsilon, alpha) tuple, rounded for dictionary keys"""
    eps, alpha = mu
    return (round(float(eps), 12), round(float(alpha), 12))


@dataclass(frozen=True)
class ModelParameters:
    """LP free-energy constants: penalty c, length scale q, mu = (epsilon, alpha)"""
    c: float
    q: float
    epsilon: float
    alpha: float

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidArgumentError(f"Energy penalty c must be positive, got {self.c}")

    @property
    def mu(self) -> Mu:
        return (self.epsilon, self.alpha)


@dataclass(frozen=True)
class SolverConfig:
    """Time step, stopping rules and phase-transition check settings"""
    dt: float = 0.1
    tol: float = 1e-8
    t_max: float = 3000.0
    pti_delta: Optional[float] = None  # None: 0.1 x the seed amplitude of each branch
    pti_stride: int = 10
    divergence_limit: float = 1e6

    def __post_init__(self):
        for name in ("dt", "tol", "t_max", "divergence_limit"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"SolverConfig.{name} must be positive")
        if self.pti_delta is not None and not self.pti_delta > 0:
            raise InvalidArgumentError("SolverConfig.pti_delta must be positive")
        if int(self.pti_stride) != self.pti_stride or self.pti_stride < 1:
            raise InvalidArgumentError("SolverConfig.pti_stride must be a positive integer")

    @property
    def max_steps(self) -> int:
        return max(1, int(round(self.t_max / self.dt)))

    def threshold(self, u0: float) -> float:
        """PTI magnitude threshold for a seed of amplitude u0"""
        if self.pti_delta is not None:
            return self.pti_delta
        return PTI_FRACTION * float(u0)


@dataclass(frozen=True)
class SeedState:
    """A state label, its prominent reciprocal vectors and the seed amplitude"""
    label: StateLabel
    modes: Tuple[Tuple[int, int, int, int], ...]
    u0: float


@dataclass
class Branch:
    """Result of evolving one seed at one parameter"""
    mu: Mu
    seed: SeedState
    outcome: BranchOutcome
    iterations: int
    residual: float
    field: Optional[FourierField] = None
    energy: Optional[float] = None
    seconds: float = 0.0
    energy_trace: List[float] = dc_field(default_factory=list)

    @property
    def label(self) -> StateLabel:
        return self.seed.label

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epsilon": self.mu[0],
            "alpha": self.mu[1],
            "label": self.label.value,
            "outcome": self.outcome.value,
            "iterations": self.iterations,
            "residual": self.residual,
            "energy": self.energy,
            "seconds": self.seconds,
        }


@dataclass
class PhaseSteadySolutionSet:
    """Converged, transition-free branches at one parameter (possibly empty)"""
    mu: Mu
    branches: Dict[StateLabel, Branch] = dc_field(default_factory=dict)
    attempts: Dict[StateLabel, Branch] = dc_field(default_factory=dict)
    failures: Dict[StateLabel, str] = dc_field(default_factory=dict)

    def add(self, branch: Branch) -> None:
        self.attempts[branch.label] = branch
        if branch.outcome != BranchOutcome.CONVERGED:
            return
        if branch.label in self.branches:
            raise InvalidArgumentError(f"Duplicate {branch.label.value} branch at mu={self.mu}")
        self.branches[branch.label] = branch

    def __contains__(self, label: StateLabel) -> bool:
        return label in self.branches

    def __len__(self) -> int:
        return len(self.branches)

    def get(self, label: StateLabel) -> Optional[Branch]:
        return self.branches.get(label)

    @property
    def labels(self) -> List[StateLabel]:
        return [s for s in STATE_ORDER if s in self.branches]

    @property
    def is_empty(self) -> bool:
        return not self.branches
