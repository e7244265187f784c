"""
Tests for workbench configuration loading
"""

import pytest

from qmor.config import (
    CONFIG_ENV, GridSpec, WorkbenchConfig, env_overrides, load_config, parse_range, save_config
)
from qmor.errors import InvalidArgumentError
from qmor.fom.types import StateLabel


class TestParseRange:
    def test_inclusive_stop(self):
        """Test inclusive stop"""
        assert parse_range("0:0.25:1") == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_single_value(self):
        """Test single value"""
        assert parse_range("0.05") == [0.05]

    def test_rounding(self):
        """Test rounding"""
        values = parse_range("-0.0125:0.002:0.0515")
        assert len(values) == 33
        assert values[0] == -0.0125
        assert values[-1] == 0.0515

    @pytest.mark.parametrize("text", ["a:b:c", "0:1", "1:0.1:0", "0:0:1", "0:-1:1"])
    def test_bad_ranges(self, text):
        """Test bad ranges"""
        with pytest.raises(InvalidArgumentError):
            parse_range(text)

    def test_grid_spec_validation(self):
        """Test grid spec validation"""
        with pytest.raises(ValueError):
            GridSpec(epsilon="0:1", alpha="0")


class TestDefaults:
    def test_training_grids(self):
        """Test training grids"""
        config = WorkbenchConfig()
        eps, alpha = config.training.train.expand()
        assert (len(eps), len(alpha)) == (33, 21)
        eps, alpha = config.training.test.expand()
        assert (len(eps), len(alpha)) == (5, 10)

    def test_caps(self):
        """Test default LQ training caps"""
        caps = WorkbenchConfig().training.caps_for(StateLabel.LQ)
        assert (caps.m, caps.n, caps.l) == (30, 15, 30)

    def test_unknown_caps(self):
        """Test unknown caps"""
        config = WorkbenchConfig()
        config.training.caps = {}
        with pytest.raises(InvalidArgumentError):
            config.training.caps_for(StateLabel.QC)

    def test_grid_and_solver(self):
        """Test grid and solver"""
        config = WorkbenchConfig()
        grid = config.build_grid()
        assert grid.n_h == 32
        solver = config.solver_config()
        assert solver.dt == 0.1 and solver.tol == 1e-8

    def test_eim_stride(self):
        """Test EIM parameters thin the training grid by eim_stride"""
        config = load_config(environ={}, overrides={"training": {"eim_stride": 7}})
        params = config.eim_parameters()
        assert params[0] == config.training.train.points()[0]
        assert len(params) == len(config.training.train.points()[::7])


class TestValidation:
    def test_odd_n_h(self):
        """Test that an odd N_H is rejected"""
        with pytest.raises(InvalidArgumentError):
            load_config(environ={}, overrides={"grid": {"n_h": 7}})

    def test_tolerance_above_seed(self):
        """Test tolerance above seed"""
        config = load_config(environ={}, overrides={"solver": {"tol": 0.5}})
        with pytest.raises(InvalidArgumentError):
            config.solver_config()

    def test_unknown_state_in_caps(self):
        """Test unknown state in caps"""
        with pytest.raises(InvalidArgumentError):
            load_config(environ={}, overrides={"training": {"caps": {"BCC": {"m": 1, "n": 1, "l": 1}}}})

    def test_check_mu(self):
        """Test the parameter domain check in strict and lax mode"""
        config = WorkbenchConfig()
        assert config.check_mu((0.01, 0.5), strict=True) == (0.01, 0.5)
        assert config.check_mu((0.01, 2.0)) == (0.01, 2.0)
        with pytest.raises(InvalidArgumentError):
            config.check_mu((0.01, 2.0), strict=True)


class TestSeedAmplitudes:
    def test_defaults(self):
        """QC seeds at 0.1, every other state at u0; delta follows the seed"""
        config = WorkbenchConfig()
        assert config.model.amplitude(StateLabel.QC) == 0.1
        assert config.model.amplitude(StateLabel.C6) == 0.3
        solver = config.solver_config()
        assert solver.pti_delta is None
        assert solver.threshold(0.3) == pytest.approx(0.03)

    def test_threshold_scales_with_u0(self):
        """Test threshold scales with u0"""
        config = load_config(environ={}, overrides={"model": {"u0": 0.6}})
        solver = config.solver_config()
        assert solver.threshold(config.model.amplitude(StateLabel.C6)) == pytest.approx(0.06)
        assert solver.threshold(config.model.amplitude(StateLabel.QC)) == pytest.approx(0.01)

    def test_explicit_delta_wins(self):
        """Test explicit delta wins"""
        config = load_config(environ={}, overrides={"model": {"u0": 0.6}, "solver": {"pti_delta": 0.05}})
        assert config.solver_config().threshold(0.6) == 0.05

    def test_unknown_state(self):
        """Test unknown state"""
        with pytest.raises(InvalidArgumentError):
            load_config(environ={}, overrides={"model": {"seed_amplitudes": {"BCC": 0.2}}})

    def test_negative_amplitude(self):
        """Test negative amplitude"""
        with pytest.raises(InvalidArgumentError):
            load_config(environ={}, overrides={"model": {"seed_amplitudes": {"LQ": -0.1}}})

    def test_delta_from_environment(self):
        """Test delta from environment"""
        config = load_config(environ={"QMOR_SOLVER_PTI_DELTA": "0.02"})
        assert config.solver.pti_delta == 0.02
        assert config.solver_config().threshold(0.3) == 0.02

    def test_tolerance_checked_against_each_seed(self):
        """Test tolerance checked against each seed"""
        config = load_config(environ={}, overrides={"solver": {"tol": 0.2}})
        with pytest.raises(InvalidArgumentError, match="QC"):
            config.solver_config()


class TestLoading:
    def test_missing_file(self, tmp_path):
        """Test missing file"""
        with pytest.raises(InvalidArgumentError):
            load_config(tmp_path / "missing.toml", environ={})

    def test_bad_toml(self, tmp_path):
        """Test malformed TOML is an invalid argument"""
        path = tmp_path / "bad.toml"
        path.write_text("[grid\nn_h = ")
        with pytest.raises(InvalidArgumentError):
            load_config(path, environ={})

    def test_round_trip(self, tmp_path):
        """Test round trip"""
        config = load_config(environ={}, overrides={"grid": {"n_h": 8}, "model": {"u0": 0.2}})
        path = save_config(config, tmp_path / "qmor.toml")
        assert load_config(path, environ={}) == config

    def test_precedence(self, tmp_path):
        """Test precedence"""
        path = tmp_path / "qmor.toml"
        path.write_text("[solver]\ndt = 0.2\ntol = 1e-9\n")
        environ = {"QMOR_SOLVER_DT": "0.05"}
        config = load_config(path, environ=environ, overrides={"solver": {"tol": 1e-7}})
        assert config.solver.dt == 0.05
        assert config.solver.tol == 1e-7

    def test_env_overrides(self):
        """Test only scalar fields are taken from the environment"""
        environ = {"QMOR_SOLVER_DT": "0.05", "QMOR_GRID_N_H": "16", "QMOR_TRAINING_CAPS": "x", "OTHER": "1"}
        assert env_overrides(environ) == {"solver": {"dt": "0.05"}, "grid": {"n_h": "16"}}

    def test_config_env_names_the_file(self, tmp_path):
        """Test config env names the file"""
        path = tmp_path / "other.toml"
        path.write_text("[paths]\nroot = \"/data/qmor\"\n")
        config = load_config(environ={CONFIG_ENV: str(path)})
        assert str(config.root) == "/data/qmor"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
