"""Tests for TML and OFF mesh files."""

import numpy as np
import pytest

from discrete_uniformization.core.errors import MeshParseError
from discrete_uniformization.core.mesh_io import (
    format_tml,
    infer_geometry,
    load_mesh,
    parse_off,
    parse_tml,
    save_tml,
)
from discrete_uniformization.core.models import Geometry
from discrete_uniformization.core.surfaces import genus2_mesh

TETRA_TML = """tml 1
# regular tetrahedron
4 4
0 1 2
0 3 1
0 2 3
1 3 2
0 1 1.0
0 2 1.0
0 3 1.0
1 2 1.0
1 3 1.0
2 3 1.0
"""

TETRA_OFF = """OFF
4 4 6
0 0 0
1 0 0
0 1 0
0 0 1
3 0 1 2
3 0 3 1
3 0 2 3
3 1 3 2
"""


class TestTml:
    """Test the TML reader and writer."""

    def test_parse(self):
        m = parse_tml(TETRA_TML)
        assert m.triangulation.vertex_count == 4
        assert m.lengths.tolist() == [1.0] * 6
        assert m.geometry == Geometry.EUCLIDEAN

    def test_format_is_canonical(self, flat_torus):
        text = format_tml(flat_torus)
        lines = text.splitlines()
        assert lines[0] == "tml 1"
        assert lines[1] == "36 72"
        assert len(lines) == 2 + 72 + 108
        again = parse_tml(text)
        assert again.lengths.tobytes() == flat_torus.lengths.tobytes()
        assert format_tml(again) == text

    def test_edge_lines_in_any_order(self):
        head, edges = TETRA_TML.split("1 3 2\n")
        shuffled = head + "1 3 2\n" + "".join(reversed(edges.splitlines(keepends=True)))
        assert parse_tml(shuffled).lengths.tolist() == [1.0] * 6

    def test_explicit_geometry(self):
        assert parse_tml(TETRA_TML, Geometry.HYPERBOLIC).geometry == Geometry.HYPERBOLIC

    @pytest.mark.parametrize("text", [
        "",
        "tml 2\n4 4\n",
        "tml 1\nfour four\n",
        TETRA_TML.replace("2 3 1.0\n", ""),
        TETRA_TML.replace("2 3 1.0", "2 3 abc"),
        TETRA_TML.replace("2 3 1.0", "0 0 1.0"),
        TETRA_TML.replace("0 1 1.0", "0 1 5.0"),
        TETRA_TML.replace("1 3 2\n0 1", "0 1"),
    ])
    def test_malformed(self, text):
        with pytest.raises(MeshParseError):
            parse_tml(text)

    def test_save_and_load(self, tmp_path, flat_torus):
        path = tmp_path / "torus.tml"
        save_tml(path, flat_torus)
        loaded = load_mesh(path)
        assert loaded.lengths.tolist() == flat_torus.lengths.tolist()


class TestOff:
    """Test the OFF reader."""

    def test_chord_lengths(self):
        m = parse_off(TETRA_OFF)
        assert sorted(m.lengths.tolist()) == pytest.approx([1.0, 1.0, 1.0] + [np.sqrt(2.0)] * 3)

    def test_header_on_own_line(self):
        text = TETRA_OFF.replace("OFF\n4 4 6", "OFF 4 4 6")
        assert parse_off(text).triangulation.face_count == 4

    def test_quads_rejected(self):
        with pytest.raises(MeshParseError):
            parse_off(TETRA_OFF.replace("3 1 3 2", "4 1 3 2 0"))

    @pytest.mark.parametrize("row", ["x 0 1 2", "3 0 1 y", "3"])
    def test_malformed_face_row(self, row):
        text = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n" + row + "\n"
        with pytest.raises(MeshParseError):
            parse_off(text)

    def test_truncated(self):
        with pytest.raises(MeshParseError):
            parse_off(TETRA_OFF.rsplit("3 1 3 2", 1)[0])

    def test_load_by_suffix(self, tmp_path):
        path = tmp_path / "tetra.off"
        path.write_text(TETRA_OFF)
        assert load_mesh(path).triangulation.genus == 0

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_mesh(tmp_path / "missing.tml")

    def test_genus_two_off_is_hyperbolic(self, tmp_path, rng):
        metric, _ = genus2_mesh(2)
        t = metric.triangulation
        coords = rng.uniform(-1.0, 1.0, size=(t.vertex_count, 3))
        rows = [f"{x!r} {y!r} {z!r}" for x, y, z in coords.tolist()]
        rows += [f"3 {i} {j} {k}" for i, j, k in t.faces.tolist()]
        path = tmp_path / "genus2.off"
        path.write_text(f"OFF\n{t.vertex_count} {t.face_count} 0\n" + "\n".join(rows) + "\n")
        loaded = load_mesh(path)
        assert loaded.triangulation.genus == 2
        assert loaded.geometry == Geometry.HYPERBOLIC
        assert load_mesh(path, Geometry.EUCLIDEAN).geometry == Geometry.EUCLIDEAN


class TestInferGeometry:
    """Test geometry inference from the genus."""

    def test_torus_is_euclidean(self, flat_torus):
        assert infer_geometry(flat_torus.triangulation) == Geometry.EUCLIDEAN

    def test_genus_two_is_hyperbolic(self):
        metric, _ = genus2_mesh(2)
        assert infer_geometry(metric.triangulation) == Geometry.HYPERBOLIC
        assert parse_tml(format_tml(metric)).geometry == Geometry.HYPERBOLIC
