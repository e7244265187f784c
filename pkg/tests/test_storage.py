"""
Tests for on-disk naming, manifests, blobs and tables
"""

import math

import numpy as np
import pytest

from qmor.errors import ArtifactError
from qmor.storage import mu_dirname, read_blob, read_csv, read_manifest, write_blob, write_csv, write_manifest


class TestMuDirname:
    def test_short_values_stay_short(self):
        """Test short values stay short"""
        assert mu_dirname((0.05, 0.5)) == "0.05_0.5"
        assert mu_dirname((-0.0125, 0.0)) == "-0.0125_0.0"

    def test_round_trips(self):
        """Test names parse back to the same floats"""
        mu = (5e-6, math.sqrt(2) / 2)
        eps, alpha = mu_dirname(mu).split("_")
        assert (float(eps), float(alpha)) == mu

    def test_numpy_scalars(self):
        """Test numpy scalars are named like floats"""
        assert mu_dirname((np.float64(0.03), np.float64(0.9))) == "0.03_0.9"


class TestArtifacts:
    def test_manifest_kind(self, tmp_path):
        """Test manifest kind"""
        write_manifest(tmp_path, "component", {"label": "QC"})
        assert read_manifest(tmp_path, "component")["label"] == "QC"
        with pytest.raises(ArtifactError):
            read_manifest(tmp_path, "pool")

    def test_missing_manifest(self, tmp_path):
        """Test missing manifest"""
        with pytest.raises(ArtifactError):
            read_manifest(tmp_path)

    def test_complex_blob(self, tmp_path):
        """Test a complex blob reads back unchanged"""
        values = np.array([[1 + 2j, -0.5j], [3.0, 0.25 - 1j]])
        write_blob(tmp_path / "w.bin", values)
        assert np.array_equal(read_blob(tmp_path / "w.bin", (2, 2), complex_values=True), values)

    def test_blob_size_mismatch(self, tmp_path):
        """Test blob size mismatch"""
        write_blob(tmp_path / "x.bin", np.zeros(5))
        with pytest.raises(ArtifactError):
            read_blob(tmp_path / "x.bin", (2, 3))

    def test_csv_keeps_full_precision(self, tmp_path):
        """Floats are written with 17 significant digits"""
        value = 1.0 / 3.0
        write_csv(tmp_path / "t.csv", ["epsilon", "label"], [(value, "QC"), (None, "LQ")])
        rows = read_csv(tmp_path / "t.csv")
        assert float(rows[0]["epsilon"]) == value
        assert rows[1]["epsilon"] == ""


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
