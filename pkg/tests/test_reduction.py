"""
Tests for reduced components, the online solver, greedy training and persistence
"""

import time

import numpy as np
import pytest

from qmor.errors import ComponentStateError, ComponentUntrainableError, DegenerateStabilityError
from qmor.fom.pool import SnapshotPool
from qmor.fom.seeds import seed_state
from qmor.fom.solver import FullOrderSolver
from qmor.fom.types import Branch, BranchOutcome, PhaseSteadySolutionSet, SolverConfig, StateLabel
from qmor.reduction.basis import gram_schmidt, orthonormality_defect
from qmor.reduction.component import MATRIX_NAMES, ReducedComponent, assemble_matrices
from qmor.reduction.greedy import greedy_offline, evaluate_testing_errors, train_component_eims
from qmor.reduction.online import (
    error_indicator, online_solve, reconstruct, relative_error, residual_norm
)
from qmor.reduction.store import load_component, save_component, trained_labels
from qmor.spectral.field import FourierField
from qmor.spectral.geometry import ProjectionSetup
from qmor.spectral.grid import SpectralGrid
from qmor.spectral.transforms import linear_multiplier
from qmor.validate import direct_residual_norm, random_hermitian, toy_component

from conftest import build_lamellar_component, lamellar_amplitude, lamellar_field

# Tight enough that the stopping error sits far below the asserted tolerances
TIGHT = SolverConfig(tol=1e-12)


class TestGramSchmidt:
    def test_orthonormal_columns(self, grid4, rng):
        """Test orthonormal columns"""
        W = None
        for _ in range(5):
            w, residual = gram_schmidt(W, random_hermitian(grid4, rng).flat)
            assert w is not None and residual > 0
            W = w[:, None] if W is None else np.column_stack([W, w])
        assert orthonormality_defect(W) < 1e-12

    def test_dependent_snapshot(self, grid4, rng):
        """Test dependent snapshot"""
        v = random_hermitian(grid4, rng).flat
        w, _ = gram_schmidt(None, v)
        again, residual = gram_schmidt(w[:, None], 3.0 * v)
        assert again is None
        assert residual < 1e-10

    def test_zero_snapshot(self, grid4):
        """Test zero snapshot"""
        w, residual = gram_schmidt(None, np.zeros(grid4.total_modes))
        assert w is None and residual == 0.0


class TestReducedComponent:
    def test_incremental_matches_assembly(self, rng):
        """Test incremental matches assembly"""
        comp = toy_component(rng, n=4)
        for name, reference in assemble_matrices(comp).items():
            scale = max(1.0, float(np.max(np.abs(reference))))
            assert np.max(np.abs(getattr(comp, name) - reference)) / scale < 1e-12, name

    def test_residual_quadratic_form(self, rng):
        """Test residual quadratic form"""
        comp = toy_component(rng)
        for _ in range(20):
            c = rng.standard_normal(comp.size)
            d = rng.standard_normal(comp.eim_g.size)
            eps = rng.uniform(-0.0125, 0.0515)
            direct = direct_residual_norm(comp, c, d, eps)
            assert residual_norm(comp, c, d, eps) == pytest.approx(direct, rel=1e-10)

    def test_matrices_are_symmetric(self, rng):
        """Test matrices are symmetric"""
        comp = toy_component(rng)
        for name in ("A1", "A2", "E1", "B1", "B2", "B4"):
            matrix = getattr(comp, name)
            assert np.array_equal(matrix, matrix.T), name

    def test_dependent_snapshot_is_rejected(self, lamellar_component, grid8):
        """Test dependent snapshot is rejected"""
        assert not lamellar_component.add_snapshot(lamellar_field(grid8, 0.2), (0.04, 0.5))
        assert lamellar_component.size == 1
        assert lamellar_component.selected_params == [(0.03, 0.5)]

    def test_truncate_is_leading_block(self, rng):
        """Test truncate is leading block"""
        comp = toy_component(rng, n=4)
        sub = comp.truncate(2)
        assert sub.size == 2
        assert np.array_equal(sub.B1, comp.B1[:2, :2])
        assert np.array_equal(sub.B3, comp.B3[:2])
        assert comp.size == 4

    def test_untrained_component(self, lamellar_component):
        """Test untrained component"""
        empty = ReducedComponent(
            StateLabel.LAM, lamellar_component.grid, lamellar_component.eim_g,
            lamellar_component.eim_h, c=50.0, dt=0.1, u0=0.3,
        )
        with pytest.raises(ComponentStateError):
            online_solve(empty, (0.05, 0.5), SolverConfig())

    def test_stability_factor(self, lamellar_component, grid8):
        """Test the stability factor of the lamellar component"""
        A = linear_multiplier(grid8, 50.0, grid8.setup.q)
        assert lamellar_component.stability_factor(0.01) == pytest.approx(float(np.min(np.abs(A - 0.01))))
        value = float(lamellar_component.multiplier_values[3])
        with pytest.raises(DegenerateStabilityError):
            lamellar_component.stability_factor(value)

    def test_seed_projection(self, lamellar_component):
        """Test the seed projects onto the first basis vector"""
        # Projection of the Lam seed (u0 on both modes) onto w = (e+ + e-)/sqrt(2)
        assert lamellar_component.seed_coefficients[0] == pytest.approx(0.3 * np.sqrt(2.0))

    def test_spectral_support(self, lamellar_component, grid8):
        """Test spectral support"""
        support = lamellar_component.spectral_support(np.array([0.2]), 0.03)
        expected = sorted(grid8.flat_index(h) for h in [(0, 1, 0, 0), (0, -1, 0, 0)])
        assert support.tolist() == expected
        assert lamellar_component.spectral_support(np.array([0.01]), 0.03).size == 0


class TestOnlineSolve:
    @pytest.mark.parametrize("eps", [0.02, 0.05])
    def test_lamellar_steady_state(self, lamellar_component, eps):
        """Test lamellar steady state"""
        solution = online_solve(lamellar_component, (eps, 0.5), TIGHT, check_transitions=True)
        assert solution.outcome == BranchOutcome.CONVERGED
        a = lamellar_amplitude(eps)
        assert solution.coefficients[0] == pytest.approx(np.sqrt(2.0) * a, rel=1e-6)
        assert solution.energy == pytest.approx(-eps * eps / 6.0, rel=1e-6)

    def test_reconstruction(self, lamellar_component, grid8):
        """Test reconstruction"""
        eps = 0.05
        solution = online_solve(lamellar_component, (eps, 0.3), TIGHT)
        field, physical = reconstruct(lamellar_component, solution)
        reference = lamellar_field(grid8, lamellar_amplitude(eps))
        assert relative_error(lamellar_component, solution.coefficients, reference) < 1e-6
        assert np.max(np.abs(field.flat - reference.flat)) < 1e-6
        assert physical.values.shape == grid8.shape

    def test_negative_eps_decays_to_a_transition(self, lamellar_component):
        """Test negative eps decays to a transition"""
        # Below the instability threshold the lamella melts
        solution = online_solve(lamellar_component, (-0.01, 0.0), SolverConfig(), check_transitions=True)
        assert solution.outcome in (BranchOutcome.PHASE_TRANSITIONED, BranchOutcome.MAX_ITERATIONS)

    def test_error_indicator(self, lamellar_component):
        """Test error indicator"""
        solution = online_solve(lamellar_component, (0.05, 0.5), SolverConfig())
        value = error_indicator(lamellar_component, solution)
        assert np.isfinite(value) and value > 0.0

    def test_error_indicator_at_degenerate_eps(self, lamellar_component):
        """Test error indicator at degenerate eps"""
        solution = online_solve(lamellar_component, (0.05, 0.5), SolverConfig())
        value = error_indicator(lamellar_component, solution, mu=(0.0, 0.5))
        assert np.isfinite(value)


class TestPhaseTransitionSynchrony:
    @pytest.mark.parametrize("mu,melts", [
        ((0.05, 0.5), False),
        ((0.03, 0.3), False),
        ((0.02, 0.2), False),
        ((-0.01, 0.5), True),
        ((-0.005, 0.1), True),
    ])
    def test_reduced_and_full_order_agree(self, lamellar_component, grid8, mu, melts):
        """The reduced PTI trips exactly where the FOM trajectory does"""
        config = SolverConfig()
        solver = FullOrderSolver(grid8, c=50.0, u0=lamellar_component.u0, config=config)
        branch = solver.solve_branch(mu, solver.seed(StateLabel.LAM))
        solution = online_solve(lamellar_component, mu, config, check_transitions=True)
        fom_melted = branch.outcome == BranchOutcome.PHASE_TRANSITIONED
        reduced_melted = solution.outcome == BranchOutcome.PHASE_TRANSITIONED
        assert fom_melted == reduced_melted == melts


class TestOnlineCost:
    def test_independent_of_grid_size(self, grid8):
        """Same reduced system, same answer and comparable wall time on N_H = 8 and 16"""
        coarse = build_lamellar_component(grid8)
        fine = build_lamellar_component(SpectralGrid(ProjectionSetup(), 16))
        for small, large in zip(coarse.online_matrices(), fine.online_matrices()):
            assert small.shape == large.shape

        mu = (0.05, 0.5)
        a = online_solve(coarse, mu, TIGHT)
        b = online_solve(fine, mu, TIGHT)
        assert np.allclose(a.coefficients, b.coefficients, rtol=1e-9, atol=1e-12)
        assert b.energy == pytest.approx(a.energy, rel=1e-9)

        def best_time(comp):
            times = []
            for _ in range(5):
                started = time.perf_counter()
                online_solve(comp, mu, TIGHT)
                times.append(time.perf_counter() - started)
            return min(times)

        assert best_time(fine) < 2.0 * best_time(coarse) + 0.05


def lamellar_set(grid, mu, with_branch=True):
    pss = PhaseSteadySolutionSet(mu=mu)
    if with_branch:
        eps = mu[0]
        a = lamellar_amplitude(eps)
        pss.add(Branch(
            mu=mu,
            seed=seed_state(StateLabel.LAM, 0.3),
            outcome=BranchOutcome.CONVERGED,
            iterations=1,
            residual=0.0,
            field=lamellar_field(grid, a),
            energy=-eps * eps / 6.0,
        ))
    return pss


class TestGreedy:
    @pytest.fixture
    def solver(self, grid8):
        return FullOrderSolver(grid8, c=50.0, u0=0.3, config=TIGHT)

    @pytest.fixture
    def pool(self, grid8):
        pool = SnapshotPool()
        pool.put(lamellar_set(grid8, (0.01, 0.5), with_branch=False))
        for mu in [(0.02, 0.5), (0.03, 0.25), (0.04, 0.75), (0.05, 0.5)]:
            pool.put(lamellar_set(grid8, mu))
        return pool

    def test_eims_from_pool(self, pool, solver):
        """Test training both EIMs from a snapshot pool"""
        eim_g, eim_h = train_component_eims(StateLabel.LAM, pool, pool.mus, solver, 4, 4, 0.0)
        assert eim_g.size == 2 and eim_h.size == 2

    def test_untrainable_state(self, pool, solver):
        """Test untrainable state"""
        with pytest.raises(ComponentUntrainableError):
            train_component_eims(StateLabel.QC, pool, pool.mus, solver, 4, 4, 0.0)

    def test_dependent_family_stops_at_one(self, pool, solver):
        """Test dependent family stops at one"""
        eim_g, eim_h = train_component_eims(StateLabel.LAM, pool, pool.mus, solver, 4, 4, 0.0)
        comp = greedy_offline(StateLabel.LAM, pool.mus, pool, solver, eim_g, eim_h, n_max=3, tol_rb=0.0)
        assert comp.size == 1
        assert comp.selected_params == [(0.02, 0.5)]
        assert (0.01, 0.5) in comp.pruned_params
        assert len(comp.history) == 1
        assert comp.history[0]["worst_true_error"] < 1e-6

    def test_testing_errors(self, pool, solver):
        """Test testing-set error rows for each basis size"""
        eim_g, eim_h = train_component_eims(StateLabel.LAM, pool, pool.mus, solver, 4, 4, 0.0)
        comp = greedy_offline(StateLabel.LAM, pool.mus, pool, solver, eim_g, eim_h, n_max=1, tol_rb=0.0)
        rows = evaluate_testing_errors(comp, [(0.03, 0.25), (0.05, 0.5)], pool, solver)
        assert [r["N"] for r in rows] == [1]
        assert rows[0]["test_solution_error"] < 1e-6
        assert rows[0]["test_energy_error"] < 1e-6

    def test_independent_snapshots_grow_the_basis(self, grid8, rng):
        """Test independent snapshots grow the basis"""
        solver = FullOrderSolver(grid8, c=50.0, u0=0.3, config=SolverConfig(t_max=100.0))
        pool = SnapshotPool()
        mus = [(0.01 * (i + 1), 0.5) for i in range(4)]
        for mu in mus:
            pss = lamellar_set(grid8, mu)
            branch = pss.get(StateLabel.LAM)
            branch.field = FourierField(branch.field.coefficients + random_hermitian(grid8, rng, 1e-3).coefficients, grid8)
            pool.put(pss)
        eim_g, eim_h = train_component_eims(StateLabel.LAM, pool, mus, solver, 6, 6, 0.0)
        comp = greedy_offline(StateLabel.LAM, mus, pool, solver, eim_g, eim_h, n_max=3, tol_rb=0.0)
        assert comp.size == 3
        assert len(set(comp.selected_params)) == 3
        assert orthonormality_defect(comp.W) < 1e-12
        assert [row["N"] for row in comp.history] == [1, 2, 3]


class TestComponentPersistence:
    def test_round_trip_is_bit_identical(self, grid8, tmp_path):
        """Test round trip is bit identical"""
        comp = build_lamellar_component(grid8)
        comp.history.append({"N": 1, "worst_indicator": 0.5, "worst_true_error": 1e-7,
                             "epsilon": 0.03, "alpha": 0.5, "seconds": 1.0})
        save_component(tmp_path / "components" / "Lam", comp,
                       [{"N": 1, "test_solution_error": 2e-7, "test_energy_error": 3e-9}])
        loaded = load_component(tmp_path / "components" / "Lam", grid8)
        for name in MATRIX_NAMES + ("W", "iW", "point_g", "point_h", "seed_coefficients"):
            assert np.array_equal(getattr(loaded, name), getattr(comp, name)), name
        assert loaded.selected_params == comp.selected_params
        assert loaded.history[0]["test_energy_error"] == 3e-9
        assert trained_labels(tmp_path) == [StateLabel.LAM]

        config = SolverConfig()
        before = online_solve(comp, (0.05, 0.5), config)
        after = online_solve(loaded, (0.05, 0.5), config)
        assert np.array_equal(before.coefficients, after.coefficients)
        assert before.energy == after.energy

    def test_grid_mismatch(self, grid8, grid4, tmp_path):
        """Test grid mismatch"""
        from qmor.errors import ArtifactError
        save_component(tmp_path / "Lam", build_lamellar_component(grid8))
        with pytest.raises(ArtifactError):
            load_component(tmp_path / "Lam", grid4)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
