"""
Tests for the empirical interpolation method
"""

import numpy as np
import pytest

from qmor.errors import InvalidArgumentError, TrainingDegeneracyError
from qmor.fom.types import StateLabel
from qmor.reduction.eim import EimTarget, evaluate_target, train_eim
from qmor.reduction.store import load_eim, save_eim


def random_snapshots(rng, k=8, size=256):
    return [((0.001 * i, 0.1 * i), rng.standard_normal(size)) for i in range(k)]


class TestTargets:
    def test_nonlinearities(self):
        """Test the G and H nonlinearities"""
        phi = np.array([0.0, 1.0, -0.5, 2.0])
        assert np.allclose(evaluate_target(EimTarget.G, phi, 0.5), 0.5 * phi ** 2 - phi ** 3)
        assert np.allclose(evaluate_target(EimTarget.H, phi, 0.5), -(0.5 / 3.0) * phi ** 3 + 0.25 * phi ** 4)


class TestTrainEim:
    @pytest.fixture
    def snapshots(self, rng):
        return random_snapshots(rng)

    def test_interpolation_matrix_is_unit_lower_triangular(self, snapshots):
        """Test interpolation matrix is unit lower triangular"""
        eim = train_eim(EimTarget.G, StateLabel.QC, snapshots, 6)
        Q = eim.interp_matrix
        assert eim.size == 6
        assert np.array_equal(np.diag(Q), np.ones(6))
        assert np.max(np.abs(np.triu(Q, 1))) == 0.0
        assert len(set(eim.points.tolist())) == 6

    def test_basis_rows_are_reproduced(self, snapshots):
        """Test basis rows are reproduced"""
        eim = train_eim(EimTarget.G, StateLabel.QC, snapshots, 6)
        for j in range(eim.size):
            coeff = eim.online_coefficients(eim.basis[j, eim.points])
            assert np.max(np.abs(coeff - np.eye(eim.size)[j])) < 1e-12

    def test_interpolant_matches_at_points(self, snapshots):
        """Test interpolant matches at points"""
        eim = train_eim(EimTarget.G, StateLabel.QC, snapshots, 5)
        values = snapshots[-1][1]
        interpolant = eim.interpolate(values[eim.points])
        assert np.allclose(interpolant[eim.points], values[eim.points], atol=1e-12)

    def test_full_rank_set_is_interpolated_exactly(self, snapshots):
        """Test full rank set is interpolated exactly"""
        eim = train_eim(EimTarget.G, StateLabel.QC, snapshots, len(snapshots))
        assert eim.evaluate_training_error(snapshots) < 1e-10
        assert eim.training_errors[-1] < 1e-10

    def test_errors_decrease(self, snapshots):
        """Test errors decrease"""
        eim = train_eim(EimTarget.G, StateLabel.QC, snapshots, len(snapshots))
        assert eim.training_errors[-1] <= eim.training_errors[0]

    def test_nested_training(self, snapshots):
        """Test nested training"""
        small = train_eim(EimTarget.G, StateLabel.QC, snapshots, 3)
        large = train_eim(EimTarget.G, StateLabel.QC, snapshots, 6)
        assert np.array_equal(small.points, large.points[:3])
        assert np.array_equal(small.basis, large.basis[:3])
        truncated = large.truncate(3)
        assert np.array_equal(truncated.interp_matrix, small.interp_matrix)
        assert truncated.selected_params == small.selected_params

    def test_stops_when_exhausted(self, rng):
        """Test stops when exhausted"""
        base = rng.standard_normal(64)
        snapshots = [((0.0, 0.1 * i), (i + 1) * base) for i in range(4)]
        eim = train_eim(EimTarget.H, StateLabel.LAM, snapshots, 4)
        assert eim.size == 1

    def test_tolerance_stops_early(self, snapshots):
        """Test tolerance stops early"""
        eim = train_eim(EimTarget.G, StateLabel.QC, snapshots, 8, tol_eim=10.0)
        assert eim.size == 1

    def test_all_zero_snapshots(self):
        """Test all zero snapshots"""
        with pytest.raises(TrainingDegeneracyError):
            train_eim(EimTarget.G, StateLabel.QC, [((0.0, 0.0), np.zeros(16))], 2)

    def test_bad_arguments(self, snapshots):
        """Test bad arguments"""
        with pytest.raises(InvalidArgumentError):
            train_eim(EimTarget.G, StateLabel.QC, [], 2)
        with pytest.raises(InvalidArgumentError):
            train_eim(EimTarget.G, StateLabel.QC, snapshots, 0)

    def test_snapshots_are_left_untouched(self, snapshots):
        """Without overwrite the caller's arrays survive training"""
        before = [values.copy() for _, values in snapshots]
        train_eim(EimTarget.G, StateLabel.QC, snapshots, 5)
        for original, (_, values) in zip(before, snapshots):
            assert np.array_equal(original, values)

    def test_overwrite_trains_the_same_component(self, rng):
        """overwrite=True reuses the snapshot arrays as residual storage"""
        snapshots = random_snapshots(rng)
        owned = [(mu, values.copy()) for mu, values in snapshots]
        reference = train_eim(EimTarget.G, StateLabel.QC, snapshots, 5)
        streamed = train_eim(EimTarget.G, StateLabel.QC, owned, 5, overwrite=True)
        assert np.array_equal(streamed.points, reference.points)
        assert np.allclose(streamed.basis, reference.basis, atol=1e-14)
        # The arrays now hold residuals, which vanish on the selected points
        for _, values in owned:
            assert np.all(values[streamed.points] == 0.0)

    def test_mismatched_lengths(self, rng):
        """Test mismatched lengths"""
        snapshots = [((0.0, 0.0), rng.standard_normal(16)), ((0.0, 0.1), rng.standard_normal(8))]
        with pytest.raises(InvalidArgumentError):
            train_eim(EimTarget.G, StateLabel.QC, snapshots, 2)

    def test_point_value_length(self, snapshots):
        """Test point value length"""
        eim = train_eim(EimTarget.G, StateLabel.QC, snapshots, 3)
        with pytest.raises(InvalidArgumentError):
            eim.online_coefficients(np.zeros(4))
        with pytest.raises(InvalidArgumentError):
            eim.truncate(4)


class TestEimPersistence:
    def test_round_trip(self, rng, tmp_path):
        """Test round trip"""
        eim = train_eim(EimTarget.H, StateLabel.C6, random_snapshots(rng), 4)
        save_eim(tmp_path / "eim_h", eim)
        loaded = load_eim(tmp_path / "eim_h")
        assert loaded.target == EimTarget.H
        assert loaded.label == StateLabel.C6
        assert np.array_equal(loaded.basis, eim.basis)
        assert np.array_equal(loaded.points, eim.points)
        assert np.array_equal(loaded.interp_matrix, eim.interp_matrix)
        assert loaded.selected_params == eim.selected_params
        assert loaded.training_errors == eim.training_errors


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
