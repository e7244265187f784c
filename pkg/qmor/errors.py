"""
Exception types raised by qmor

Every error derives from QmorError so batch drivers can catch, record and
continue. The second base keeps the builtin category usable by callers.
"""

from typing import Dict, Optional, Sequence


class QmorError(Exception):
    """Base class for all workbench errors"""


class InvalidArgumentError(QmorError, ValueError):
    """Bad grid size, mode outside the grid, length mismatch, ..."""


class NumericalOverflowError(QmorError, ArithmeticError):
    """Non-finite values or a diverging iteration"""

    def __init__(
        self,
        message: str,
        mode: Optional[Sequence[int]] = None,
        iteration: Optional[int] = None
    ):
        self.mode = tuple(int(h) for h in mode) if mode is not None else None
        self.iteration = iteration
        details = []
        if self.mode is not None:
            details.append(f"mode={self.mode}")
        if iteration is not None:
            details.append(f"iteration={iteration}")
        if details:
            message = f"{message} ({', '.join(details)})"
        super().__init__(message)


class TrainingDegeneracyError(QmorError, RuntimeError):
    """Greedy EIM picked a collocation point twice"""

    def __init__(self, message: str, iteration: int):
        self.iteration = iteration
        super().__init__(f"{message} (iteration {iteration})")


class ComponentUntrainableError(QmorError, RuntimeError):
    """No parameter in the training set produced a branch of the requested state"""

    def __init__(self, label: str):
        self.label = label
        super().__init__(f"No {label}-branch found anywhere in the training set")


class DegenerateStabilityError(QmorError, ArithmeticError):
    """Stability factor of the steady-state operator vanished"""


class ComponentStateError(QmorError, RuntimeError):
    """Reduced component used before it holds any basis vector"""


class ClassificationError(QmorError, RuntimeError):
    """Every online solve at a parameter failed"""

    def __init__(self, mu, causes: Dict[str, str]):
        self.mu = tuple(mu)
        self.causes = dict(causes)
        summary = "; ".join(f"{k}: {v}" for k, v in self.causes.items())
        super().__init__(f"All online solves failed at mu={self.mu}: {summary}")


class ArtifactError(QmorError, FileNotFoundError):
    """Persisted artifact missing or unreadable"""
