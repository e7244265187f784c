"""
Empirical interpolation of the LP nonlinearities

One component per (state, target). The greedy picks the worst-approximated
snapshot, adds its normalized residual as a basis function and the
residual's largest entry as a collocation point. New basis functions vanish
at all earlier points, so the interpolation matrix Q[i, j] = V_j(x_i) is
unit lower triangular and online coefficients come from one forward
substitution.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_triangular

from qmor.errors import InvalidArgumentError, TrainingDegeneracyError
from qmor.fom.solver import energy_density, nonlinear_force
from qmor.fom.types import Mu, StateLabel, mu_key

logger = logging.getLogger(__name__)

# Residuals below this fraction of the largest snapshot entry count as exhausted
EXHAUSTED_RATIO = 1e-14

EimSnapshot = Tuple[Mu, np.ndarray]


class EimTarget(str, Enum):
    G = "g"  # alpha phi^2 - phi^3
    H = "h"  # -(alpha/3) phi^3 + phi^4 / 4


def evaluate_target(target: EimTarget, phi: np.ndarray, alpha: float) -> np.ndarray:
    if EimTarget(target) == EimTarget.G:
        return nonlinear_force(phi, alpha)
    return energy_density(phi, alpha)


@dataclass
class EimComponent:
    """Basis rows V (M x grid), points X (M,), Q = V[:, X].T lower triangular"""
    target: EimTarget
    label: StateLabel
    basis: np.ndarray
    points: np.ndarray
    interp_matrix: np.ndarray
    selected_params: List[Mu] = field(default_factory=list)
    training_errors: List[float] = field(default_factory=list)

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    @property
    def grid_size(self) -> int:
        return int(self.basis.shape[1])

    def online_coefficients(self, point_values: np.ndarray) -> np.ndarray:
        """Forward substitution Q coeff = values, O(M^2)"""
        point_values = np.asarray(point_values, dtype=float)
        if point_values.shape != (self.size,):
            raise InvalidArgumentError(f"Expected {self.size} point values, got shape {point_values.shape}")
        return solve_triangular(self.interp_matrix, point_values, lower=True, unit_diagonal=True)

    def interpolate(self, point_values: np.ndarray) -> np.ndarray:
        """Full-grid interpolant; not for online use"""
        return self.basis.T @ self.online_coefficients(point_values)

    def point_values(self, phi_at_points: np.ndarray, alpha: float) -> np.ndarray:
        return evaluate_target(self.target, np.asarray(phi_at_points, dtype=float), alpha)

    def evaluate_training_error(self, snapshots: Sequence[EimSnapshot]) -> float:
        """Worst relative L2 interpolation error over the given snapshots"""
        worst = 0.0
        for _, values in snapshots:
            values = np.asarray(values, dtype=float).ravel()
            norm = np.linalg.norm(values)
            if norm == 0.0:
                continue
            error = np.linalg.norm(values - self.interpolate(values[self.points]))
            worst = max(worst, float(error / norm))
        return worst

    def truncate(self, m: int) -> "EimComponent":
        """The nested component made of the first m bases and points"""
        if not 1 <= m <= self.size:
            raise InvalidArgumentError(f"Cannot truncate an M={self.size} EIM component to {m}")
        return EimComponent(
            target=self.target,
            label=self.label,
            basis=self.basis[:m].copy(),
            points=self.points[:m].copy(),
            interp_matrix=self.interp_matrix[:m, :m].copy(),
            selected_params=list(self.selected_params[:m]),
            training_errors=list(self.training_errors[:m]),
        )


def train_eim(
    target: EimTarget,
    label: StateLabel,
    snapshots: Sequence[EimSnapshot],
    m_max: int,
    tol_eim: float = 0.0,
    overwrite: bool = False
) -> EimComponent:
    """
    Greedy EIM over snapshot values of one nonlinearity.

    Residuals are updated one snapshot at a time, so the working set is a
    single copy of the snapshots; with overwrite=True the snapshot arrays
    themselves hold the residuals and no copy is made.

    Ties (equal residuals, equal point magnitudes) go to the lowest index, so
    training with a larger m_max extends the smaller component.
    """
    if not snapshots:
        raise InvalidArgumentError(f"No snapshots to train the {label.value}/{target.value} EIM")
    if m_max < 1:
        raise InvalidArgumentError(f"m_max must be >= 1, got {m_max}")

    mus = [mu_key(mu) for mu, _ in snapshots]
    if overwrite:
        residuals = [np.asarray(v, dtype=float).reshape(-1) for _, v in snapshots]
    else:
        residuals = [np.array(v, dtype=float).reshape(-1) for _, v in snapshots]
    size = residuals[0].size
    if any(r.size != size for r in residuals):
        raise InvalidArgumentError(f"{label.value}/{target.value} EIM snapshots differ in length")

    norms = np.array([np.linalg.norm(r) for r in residuals])
    safe_norms = np.where(norms > 0, norms, 1.0)
    residual_max = np.array([np.max(np.abs(r), initial=0.0) for r in residuals])
    scale = float(np.max(residual_max))

    basis, points, errors, selected = [], [], [], []
    while len(points) < m_max:
        iteration = len(points) + 1
        k = int(np.argmax(residual_max))
        if residual_max[k] <= EXHAUSTED_RATIO * scale:
            logger.info(f"EIM {label.value}/{target.value}: snapshots exhausted at M={len(points)}")
            break
        x = int(np.argmax(np.abs(residuals[k])))
        if x in points:
            raise TrainingDegeneracyError(f"EIM point {x} selected twice", iteration)

        v = residuals[k] / residuals[k][x]
        v[points] = 0.0
        v[x] = 1.0
        points.append(x)

        # Coefficient of the new basis for every snapshot is its residual at x
        relative = np.empty(len(residuals))
        for i, r in enumerate(residuals):
            r -= r[x] * v
            r[points] = 0.0
            residual_max[i] = np.max(np.abs(r), initial=0.0)
            relative[i] = np.linalg.norm(r) / safe_norms[i]

        basis.append(v)
        selected.append(mus[k])

        worst = float(np.max(relative))
        errors.append(worst)
        logger.debug(f"EIM {label.value}/{target.value} M={iteration}: point {x}, worst error {worst:.3e}")
        if worst < tol_eim:
            break

    if not points:
        raise TrainingDegeneracyError(f"All {label.value}/{target.value} snapshots vanish", 1)

    V = np.stack(basis)
    X = np.array(points, dtype=np.int64)
    Q = np.tril(V[:, X].T)
    np.fill_diagonal(Q, 1.0)
    logger.info(
        f"Trained EIM {label.value}/{target.value}: M={len(points)}, worst error {errors[-1]:.3e}"
    )
    return EimComponent(
        target=EimTarget(target),
        label=StateLabel(label),
        basis=V,
        points=X,
        interp_matrix=Q,
        selected_params=selected,
        training_errors=errors,
    )
