"""
Phase diagram types
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from qmor.errors import InvalidArgumentError
from qmor.fom.types import Mu, StateLabel, mu_key

UNRESOLVED = "Unresolved"

Bounds = Tuple[Tuple[float, float], Tuple[float, float]]


@dataclass
class PhasePoint:
    """Stable phase at one parameter; label None means unresolved"""
    mu: Mu
    label: Optional[StateLabel]
    energies: Dict[StateLabel, float] = field(default_factory=dict)
    generation: int = 0
    tie: bool = False
    causes: Dict[str, str] = field(default_factory=dict)
    seconds: Dict[StateLabel, float] = field(default_factory=dict)

    @property
    def label_text(self) -> str:
        return self.label.value if self.label is not None else UNRESOLVED

    @property
    def energy_min(self) -> Optional[float]:
        return min(self.energies.values()) if self.energies else None

    @property
    def resolved(self) -> bool:
        return self.label is not None

    def to_row(self) -> List[Any]:
        return [self.mu[0], self.mu[1], self.label_text, self.generation, self.energy_min]


@dataclass
class PhaseDiagram:
    """
    Classified points inside a parameter rectangle. shape is set while the
    points still form the initial (n_eps x n_alpha) grid in eps-major order.
    """
    bounds: Bounds
    points: List[PhasePoint] = field(default_factory=list)
    history: List[Dict[str, Any]] = field(default_factory=list)
    shape: Optional[Tuple[int, int]] = None
    _index: Dict[Mu, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        (e0, e1), (a0, a1) = self.bounds
        self.bounds = ((min(e0, e1), max(e0, e1)), (min(a0, a1), max(a0, a1)))
        points, self.points = list(self.points), []
        for point in points:
            self.add(point)

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, mu) -> bool:
        return mu_key(mu) in self._index

    def within(self, mu) -> bool:
        (e0, e1), (a0, a1) = self.bounds
        slack = 1e-12
        return e0 - slack <= mu[0] <= e1 + slack and a0 - slack <= mu[1] <= a1 + slack

    def add(self, point: PhasePoint) -> bool:
        """Append unless a point with the same rounded mu exists"""
        key = mu_key(point.mu)
        if key in self._index:
            return False
        if not self.within(key):
            raise InvalidArgumentError(f"mu={key} outside diagram bounds {self.bounds}")
        point.mu = key
        self._index[key] = len(self.points)
        self.points.append(point)
        return True

    def get(self, mu) -> Optional[PhasePoint]:
        i = self._index.get(mu_key(mu))
        return None if i is None else self.points[i]

    @property
    def mus(self) -> np.ndarray:
        return np.array([p.mu for p in self.points], dtype=float).reshape(-1, 2)

    @property
    def label_texts(self) -> List[str]:
        return [p.label_text for p in self.points]

    def counts(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for text in self.label_texts:
            out[text] = out.get(text, 0) + 1
        return out
