"""Tests for triangulation validation and mesh metrics."""

import math

import numpy as np
import pytest

from discrete_uniformization.core.errors import (
    Disconnected,
    DuplicateFace,
    MeshError,
    NonManifoldEdge,
    NonManifoldVertex,
    NonOrientable,
    NonSimplicial,
    TriangleInequalityViolated,
)
from discrete_uniformization.core.mesh import MeshMetric, build_triangulation, check_metric
from discrete_uniformization.core.models import Geometry
from discrete_uniformization.core.surfaces import grid_torus_faces

from .conftest import TETRAHEDRON

# six-vertex projective plane
RP2 = [
    (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 5, 1),
    (1, 2, 4), (2, 3, 5), (3, 4, 1), (4, 5, 2), (5, 1, 3),
]


class TestBuildTriangulation:
    """Test combinatorial validation."""

    def test_tetrahedron(self):
        t = build_triangulation(TETRAHEDRON)
        assert (t.vertex_count, t.edge_count, t.face_count) == (4, 6, 4)
        assert t.euler_characteristic == 2
        assert t.genus == 0

    def test_grid_torus(self):
        t = build_triangulation(grid_torus_faces(6))
        assert (t.vertex_count, t.edge_count, t.face_count) == (36, 108, 72)
        assert t.genus == 1
        assert np.all(t.vertex_degrees() == 6)

    def test_edges_canonical_and_sorted(self):
        t = build_triangulation(grid_torus_faces(5))
        assert np.all(t.edges[:, 0] < t.edges[:, 1])
        keys = t.edges[:, 0] * t.vertex_count + t.edges[:, 1]
        assert np.all(np.diff(keys) > 0)

    def test_face_edges_opposite_corners(self):
        t = build_triangulation(TETRAHEDRON)
        for f, face in enumerate(t.faces):
            for c in range(3):
                edge = set(t.edges[t.face_edges[f, c]].tolist())
                assert edge == set(face.tolist()) - {face[c]}

    def test_edge_faces_and_corners(self):
        t = build_triangulation(grid_torus_faces(4))
        for e in range(t.edge_count):
            for side in range(2):
                f, c = t.edge_faces[e, side], t.edge_corners[e, side]
                assert t.face_edges[f, c] == e

    def test_reorients_inconsistent_faces(self):
        flipped = [TETRAHEDRON[0][::-1]] + TETRAHEDRON[1:]
        t = build_triangulation(flipped)
        directed = {tuple(e) for e in t.directed_edges().tolist()}
        assert len(directed) == 12
        assert all((j, i) in directed for i, j in directed)

    def test_repeated_vertex(self):
        with pytest.raises(NonSimplicial):
            build_triangulation([(0, 0, 1), (0, 1, 2)])

    def test_bad_shape(self):
        with pytest.raises(NonSimplicial):
            build_triangulation([(0, 1)])

    def test_index_out_of_range(self):
        with pytest.raises(NonSimplicial):
            build_triangulation(TETRAHEDRON, vertex_count=3)

    def test_open_surface(self):
        with pytest.raises(NonManifoldEdge) as exc:
            build_triangulation([(0, 1, 2)])
        assert exc.value.face_count == 1

    def test_duplicate_face(self):
        with pytest.raises(DuplicateFace):
            build_triangulation([(0, 1, 2), (0, 2, 1)])

    def test_pinched_vertex(self):
        second = [tuple(v + 3 if v else 0 for v in face) for face in TETRAHEDRON]
        with pytest.raises(NonManifoldVertex) as exc:
            build_triangulation(TETRAHEDRON + second)
        assert exc.value.vertex == 0

    def test_non_orientable(self):
        with pytest.raises(NonOrientable):
            build_triangulation(RP2)

    def test_disconnected(self):
        second = [tuple(v + 4 for v in face) for face in TETRAHEDRON]
        with pytest.raises(Disconnected) as exc:
            build_triangulation(TETRAHEDRON + second)
        assert exc.value.components == 2

    def test_arrays_read_only(self):
        t = build_triangulation(TETRAHEDRON)
        with pytest.raises(ValueError):
            t.faces[0, 0] = 3


class TestMeshMetric:
    """Test metrics on a triangulation."""

    def test_equilateral_angles(self, flat_torus):
        assert flat_torus.angles() == pytest.approx(np.full((72, 3), math.pi / 3))
        assert flat_torus.face_areas().sum() == pytest.approx(1.0, rel=1e-14)

    def test_opposite_angle_sums(self, flat_torus):
        assert flat_torus.opposite_angle_sums() == pytest.approx(np.full(108, 2 * math.pi / 3))

    def test_length_count(self):
        t = build_triangulation(TETRAHEDRON)
        with pytest.raises(MeshError):
            MeshMetric(t, np.ones(5), Geometry.EUCLIDEAN)

    def test_triangle_inequality(self):
        t = build_triangulation(TETRAHEDRON)
        lengths = np.ones(6)
        lengths[0] = 10.0
        with pytest.raises(TriangleInequalityViolated):
            MeshMetric(t, lengths, Geometry.EUCLIDEAN)

    def test_spherical_rejected(self):
        t = build_triangulation(TETRAHEDRON)
        with pytest.raises(MeshError):
            MeshMetric(t, np.ones(6), Geometry.SPHERICAL)

    def test_lengths_read_only(self, flat_torus):
        with pytest.raises(ValueError):
            flat_torus.lengths[0] = 1.0

    def test_with_lengths_keeps_geometry(self, hyperbolic_grid):
        other = hyperbolic_grid.with_lengths(np.full(hyperbolic_grid.triangulation.edge_count, 0.2))
        assert other.geometry == Geometry.HYPERBOLIC
        assert other.max_length == pytest.approx(0.2)


class TestCheckMetric:
    """Test the regularity report."""

    def test_equilateral(self, flat_torus):
        report = check_metric(flat_torus)
        assert report.min_angle == pytest.approx(math.pi / 3)
        assert report.max_opposite_angle_sum == pytest.approx(2 * math.pi / 3)
        assert report.is_regular(1e-3, 1e-3)
        assert not report.is_regular(1.1, 1e-3)

    def test_worst_face_located(self, flat_torus):
        lengths = flat_torus.lengths.copy()
        e = int(flat_torus.triangulation.face_edges[5, 0])
        lengths[e] *= 0.5
        report = check_metric(flat_torus.with_lengths(lengths))
        assert report.worst_face in flat_torus.triangulation.edge_faces[e].tolist()
        assert report.min_angle < math.pi / 3
