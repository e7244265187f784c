"""
Stable-phase classification with the reduced components
"""

import logging
from typing import Dict, Mapping, Optional, Tuple

from qmor.errors import ClassificationError, ComponentStateError, QmorError
from qmor.fom.types import STATE_ORDER, BranchOutcome, SolverConfig, StateLabel, mu_key
from qmor.reduction.component import ReducedComponent
from qmor.reduction.online import online_solve
from qmor.diagram.types import PhasePoint

logger = logging.getLogger(__name__)


def select_stable(energies: Mapping[StateLabel, float], tie_tol: float = 0.0) -> Tuple[Optional[StateLabel], bool]:
    """
    Minimum-energy label; equal minima go to the first label in STATE_ORDER.
    Returns (label, tie), label None when energies is empty.
    """
    if not energies:
        return None, False
    lowest = min(energies.values())
    tied = [s for s in STATE_ORDER if s in energies and energies[s] - lowest <= tie_tol]
    return tied[0], len(tied) > 1


class PhaseClassifier:
    """Runs every component online at a parameter and keeps the transition-free ones"""

    def __init__(
        self,
        components: Mapping[StateLabel, ReducedComponent],
        config: SolverConfig,
        tie_tol: float = 0.0
    ):
        if not components:
            raise ComponentStateError("No trained components to classify with")
        self.components: Dict[StateLabel, ReducedComponent] = {
            s: components[s] for s in STATE_ORDER if s in components
        }
        self.config = config
        self.tie_tol = tie_tol

    def classify(self, mu, generation: int = 0) -> PhasePoint:
        key = mu_key(mu)
        energies: Dict[StateLabel, float] = {}
        causes: Dict[str, str] = {}
        seconds: Dict[StateLabel, float] = {}
        errors = 0
        for label, comp in self.components.items():
            try:
                solution = online_solve(comp, key, self.config, check_transitions=True)
            except QmorError as e:
                errors += 1
                causes[label.value] = str(e)
                continue
            seconds[label] = solution.seconds
            if solution.outcome == BranchOutcome.CONVERGED:
                energies[label] = solution.energy
            else:
                causes[label.value] = solution.outcome.value

        if errors == len(self.components):
            raise ClassificationError(key, causes)

        label, tie = select_stable(energies, self.tie_tol)
        if tie:
            logger.info(f"Energy tie at mu={key}, picked {label.value}")
        if label is None:
            logger.debug(f"No surviving branch at mu={key}: {causes}")
        return PhasePoint(
            mu=key,
            label=label,
            energies=energies,
            generation=generation,
            tie=tie,
            causes=causes,
            seconds=seconds,
        )

    def classify_or_unresolved(self, mu, generation: int = 0) -> PhasePoint:
        """classify, recording a total failure as an unresolved point"""
        try:
            return self.classify(mu, generation)
        except ClassificationError as e:
            logger.error(str(e))
            return PhasePoint(mu=mu_key(mu), label=None, generation=generation, causes=e.causes)
