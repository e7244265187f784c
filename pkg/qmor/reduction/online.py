"""
Online stage: reduced time stepping, reduced energy, residual indicator

Every loop body works on N- and M-sized arrays only; grid-sized work is
confined to reconstruct().
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from qmor.errors import DegenerateStabilityError, NumericalOverflowError
from qmor.fom.types import BranchOutcome, Mu, SolverConfig, StateLabel, mu_key
from qmor.reduction.component import ReducedComponent
from qmor.spectral.field import FourierField, PhysicalField

logger = logging.getLogger(__name__)


@dataclass
class OnlineSolution:
    """Reduced steady state of one component at one parameter"""
    mu: Mu
    label: StateLabel
    coefficients: np.ndarray
    energy: float
    iterations: int
    outcome: BranchOutcome
    residual: float
    seconds: float = 0.0
    g_coefficients: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epsilon": self.mu[0],
            "alpha": self.mu[1],
            "label": self.label.value,
            "energy": self.energy,
            "iterations": self.iterations,
            "outcome": self.outcome.value,
            "residual": self.residual,
            "seconds": self.seconds,
        }


def g_coefficients(comp: ReducedComponent, coefficients: np.ndarray, alpha: float) -> np.ndarray:
    phi = comp.point_g @ coefficients
    return comp.eim_g.online_coefficients(comp.eim_g.point_values(phi, alpha))


def reduced_energy(comp: ReducedComponent, coefficients: np.ndarray, mu) -> Tuple[float, np.ndarray]:
    """(c/2) c^T E1 c - (eps/2) c^T A2 c + gamma . h_weights, plus gamma"""
    eps, alpha = mu
    phi = comp.point_h @ coefficients
    gamma = comp.eim_h.online_coefficients(comp.eim_h.point_values(phi, alpha))
    quadratic = 0.5 * comp.c * coefficients @ comp.E1 @ coefficients
    mass = 0.5 * eps * coefficients @ comp.A2 @ coefficients
    return float(quadratic - mass + gamma @ comp.h_weights), gamma


def online_solve(
    comp: ReducedComponent,
    mu,
    config: SolverConfig,
    check_transitions: bool = False
) -> OnlineSolution:
    """
    Reduced gradient flow A1 c' = (1 + dt eps) A2 c + A3 d from the projected seed.

    With check_transitions the reconstructed support is compared with the
    seed support every pti_stride iterations and at convergence.
    """
    comp.require_trained()
    eps, alpha = mu
    started = time.perf_counter()
    A1, A2, A3 = comp.online_matrices(config.dt)
    factor = cho_factor(A1)
    mass = (1.0 + config.dt * eps) * A2
    delta = config.threshold(comp.u0)

    c = comp.seed_coefficients.copy()
    d = np.zeros(comp.eim_g.size)
    outcome = BranchOutcome.MAX_ITERATIONS
    residual = float("inf")
    iteration = 0
    while iteration < config.max_steps:
        d = g_coefficients(comp, c, alpha)
        updated = cho_solve(factor, mass @ c + A3 @ d)
        iteration += 1
        if not np.all(np.isfinite(updated)) or np.max(np.abs(updated)) > config.divergence_limit:
            raise NumericalOverflowError(
                f"Online {comp.label.value} solve diverged at mu={tuple(mu)}", iteration=iteration
            )
        residual = float(np.linalg.norm(updated - c))
        c = updated

        if residual < config.tol:
            outcome = BranchOutcome.CONVERGED
            if check_transitions and comp.phase_transitioned(c, delta):
                outcome = BranchOutcome.PHASE_TRANSITIONED
            break
        if check_transitions and iteration % config.pti_stride == 0:
            if comp.phase_transitioned(c, delta):
                outcome = BranchOutcome.PHASE_TRANSITIONED
                break

    energy, _ = reduced_energy(comp, c, mu)
    return OnlineSolution(
        mu=mu_key(mu),
        label=comp.label,
        coefficients=c,
        energy=energy,
        iterations=iteration,
        outcome=outcome,
        residual=residual,
        seconds=time.perf_counter() - started,
        g_coefficients=g_coefficients(comp, c, alpha),
    )


def residual_norm(comp: ReducedComponent, coefficients: np.ndarray, d: np.ndarray, epsilon: float) -> float:
    """||(A - eps) W c - G d||_2 from the B-matrix quadratic form"""
    c = coefficients
    value = (
        c @ comp.B1 @ c
        - 2.0 * epsilon * (c @ comp.B2 @ c)
        + epsilon * epsilon * (c @ comp.B4 @ c)
        - 2.0 * (c @ comp.B3 @ d)
        + 2.0 * epsilon * (c @ comp.B5 @ d)
        + d @ comp.B6 @ d
    )
    return float(np.sqrt(max(value, 0.0)))


def error_indicator(comp: ReducedComponent, solution: OnlineSolution, mu=None) -> float:
    """Residual norm over the stability factor min |A - eps|"""
    eps, alpha = solution.mu if mu is None else mu
    d = g_coefficients(comp, solution.coefficients, alpha)
    try:
        beta = comp.stability_factor(eps)
    except DegenerateStabilityError as e:
        logger.warning(f"{e}; using machine epsilon as stability factor")
        beta = float(np.finfo(float).eps)
    return residual_norm(comp, solution.coefficients, d, eps) / beta


def reconstruct(comp: ReducedComponent, coefficients) -> Tuple[FourierField, PhysicalField]:
    """(W c, iW c)"""
    if isinstance(coefficients, OnlineSolution):
        coefficients = coefficients.coefficients
    coefficients = np.asarray(coefficients, dtype=float)
    return (
        FourierField(comp.W @ coefficients, comp.grid),
        PhysicalField(comp.iW @ coefficients, comp.grid),
    )


def relative_error(comp: ReducedComponent, coefficients: np.ndarray, reference: FourierField) -> float:
    """||W c - phihat|| / ||phihat||"""
    norm = reference.norm()
    diff = np.linalg.norm(comp.W @ coefficients - reference.flat)
    return float(diff / norm) if norm > 0 else float(diff)
