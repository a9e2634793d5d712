"""Tests for the command-line interface."""

import csv
import json

import numpy as np
import pytest
from click.testing import CliRunner

from discrete_uniformization.cli import cli, parse_resolutions
from discrete_uniformization.core.conformal import curvature_of, scale_lengths
from discrete_uniformization.core.constants import DEFAULT_SEED, K0
from discrete_uniformization.core.mesh_io import load_mesh, save_tml
from discrete_uniformization.core.models import SolveReport, SolveStatus, VerificationReport
from discrete_uniformization.core.surfaces import equilateral_torus

from .test_mesh_io import TETRA_OFF


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, ["--log-level", "ERROR", *args], obj={})


@pytest.fixture
def bumpy_torus_file(tmp_path, rng):
    path = tmp_path / "bumpy.tml"
    save_tml(path, scale_lengths(equilateral_torus(6), rng.uniform(-0.05, 0.05, size=36)))
    return path


class TestParseResolutions:
    """Test resolution lists."""

    def test_integers(self):
        assert parse_resolutions("8, 16,32") == [8, 16, 32]

    def test_levels(self):
        assert parse_resolutions("k0,K0+1") == [K0, K0 + 1]

    def test_garbage(self):
        with pytest.raises(ValueError):
            parse_resolutions("eight")


class TestUniformize:
    """Test the uniformize command."""

    def test_converges(self, runner, tmp_path, bumpy_torus_file):
        out = tmp_path / "report.json"
        lengths = tmp_path / "flat.tml"
        result = invoke(runner, "uniformize", "--in", str(bumpy_torus_file), "--out", str(out),
                        "--lengths-out", str(lengths))
        assert result.exit_code == 0, result.output
        report = SolveReport.model_validate_json(out.read_text())
        assert report.status == SolveStatus.CONVERGED
        assert curvature_of(load_mesh(lengths)) == pytest.approx(np.zeros(36), abs=1e-9)

    def test_flow_mode(self, runner, tmp_path, bumpy_torus_file):
        out = tmp_path / "report.json"
        result = invoke(runner, "uniformize", "--in", str(bumpy_torus_file), "--out", str(out),
                        "--mode", "flow")
        assert result.exit_code == 0, result.output
        assert json.loads(out.read_text())["mode"] == "flow"

    def test_wrong_genus(self, runner, tmp_path):
        path = tmp_path / "tetra.off"
        path.write_text(TETRA_OFF)
        result = invoke(runner, "uniformize", "--in", str(path))
        assert result.exit_code == 2
        assert "WrongGenus" in result.output

    def test_missing_file(self, runner, tmp_path):
        result = invoke(runner, "uniformize", "--in", str(tmp_path / "missing.tml"))
        assert result.exit_code == 1

    def test_malformed_file(self, runner, tmp_path):
        path = tmp_path / "bad.tml"
        path.write_text("tml 1\nnot a header\n")
        assert invoke(runner, "uniformize", "--in", str(path)).exit_code == 1


class TestVerify:
    """Test the verify command."""

    def test_default_run_passes(self, runner, tmp_path, monkeypatch):
        monkeypatch.delenv("DU_SEED", raising=False)
        out = tmp_path / "verify.json"
        result = invoke(runner, "verify", "--out", str(out))
        assert result.exit_code == 0, result.output
        report = VerificationReport.model_validate_json(out.read_text())
        assert report.seed == DEFAULT_SEED
        assert report.passed

    def test_same_seed_same_bytes(self, runner):
        first = invoke(runner, "verify", "--seed", "42")
        second = invoke(runner, "verify", "--seed", "42")
        assert first.exit_code == second.exit_code == 0
        assert "green_identity" in first.output
        assert first.output.encode() == second.output.encode()

    def test_fault_exits_3(self, runner, tmp_path):
        out = tmp_path / "verify.json"
        result = invoke(runner, "verify", "--seed", "5", "--fault", "jacobian-sign", "--out", str(out))
        assert result.exit_code == 3
        report = VerificationReport.model_validate_json(out.read_text())
        assert report.seed == 5
        assert not report.passed


class TestStudy:
    """Test the study command."""

    def test_flat_torus(self, runner, tmp_path):
        out = tmp_path / "study.csv"
        result = invoke(runner, "study", "--surface", "torus:amp=0", "--res", "4,6,8", "--out", str(out))
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert lines[0] == "resolution,h,error,residual,runtime_ms"
        assert len(lines) == 4

    def test_genus2_working_levels(self, runner, tmp_path):
        out = tmp_path / "study.csv"
        result = invoke(runner, "study", "--surface", "genus2", "--res", "k0,k0+1", "--out", str(out))
        assert result.exit_code == 0, result.output
        rows = list(csv.DictReader(out.read_text().splitlines()))
        assert [r["resolution"] for r in rows] == [str(K0), str(K0 + 1)]
        assert max(float(r["error"]) for r in rows) <= 1e-8

    def test_too_few_resolutions(self, runner):
        result = invoke(runner, "study", "--surface", "torus", "--res", "8,16")
        assert result.exit_code == 2
        assert "at least 3" in result.output

    def test_unknown_surface(self, runner):
        result = invoke(runner, "study", "--surface", "klein")
        assert result.exit_code == 2
        assert "unknown surface" in result.output


class TestMeshGen:
    """Test the mesh-gen command."""

    def test_torus(self, runner, tmp_path):
        out = tmp_path / "torus.tml"
        result = invoke(runner, "mesh-gen", "--surface", "torus:amp=0", "--res", "8", "--out", str(out))
        assert result.exit_code == 0, result.output
        mesh = load_mesh(out)
        assert mesh.triangulation.vertex_count == 64
        assert mesh.triangulation.genus == 1

    def test_genus2_too_coarse(self, runner):
        result = invoke(runner, "mesh-gen", "--surface", "genus2", "--res", "2")
        assert result.exit_code == 2

    def test_single_resolution(self, runner):
        assert invoke(runner, "mesh-gen", "--res", "8,16").exit_code == 2


class TestIsoperimetric:
    """Test the isoperimetric command."""

    def test_small_torus(self, runner, tmp_path):
        path = tmp_path / "small.tml"
        save_tml(path, equilateral_torus(4))
        result = invoke(runner, "isoperimetric", "--in", str(path))
        assert result.exit_code == 0, result.output
        data = json.loads(result.output)
        assert data["constant"] > 0
        assert 0 < len(data["subset"]) < 16

    def test_too_large(self, runner, tmp_path):
        path = tmp_path / "large.tml"
        save_tml(path, equilateral_torus(5))
        assert invoke(runner, "isoperimetric", "--in", str(path)).exit_code == 2
