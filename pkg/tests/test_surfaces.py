"""Tests for the torus and genus-2 test surfaces."""

import math

import numpy as np
import pytest

from discrete_uniformization.core import surfaces
from discrete_uniformization.core.conformal import curvature_of, scale_lengths, total_area
from discrete_uniformization.core.errors import SubdivisionTooCoarse, SurfaceError
from discrete_uniformization.core.geodesic import ConformalTorus
from discrete_uniformization.core.surfaces import (
    HyperbolicOctagonSurface,
    disk_distance,
    disk_midpoint,
    genus2_mesh,
    genus2_positions,
    octagon_corners,
    parse_surface,
    sample_genus2_mesh,
    sample_torus_mesh,
    synthetic_factor,
    torus_lattice,
)


class TestTorusLattice:
    """Test the sheared lattice triangulation."""

    def test_counts(self):
        tri, positions, tails, chords = torus_lattice(8)
        assert (tri.vertex_count, tri.edge_count, tri.face_count) == (64, 192, 128)
        assert tri.genus == 1
        assert positions.shape == (64, 2)
        assert tails.shape == chords.shape == (192, 2)

    @pytest.mark.parametrize("n", [2, 5])
    def test_rejects_odd_or_small(self, n):
        with pytest.raises(ValueError):
            torus_lattice(n)

    def test_chords_join_edge_ends(self):
        tri, positions, tails, chords = torus_lattice(6)
        heads = positions[tri.edges[:, 1]]
        assert np.array_equal(tails, positions[tri.edges[:, 0]])
        gap = np.mod(tails + chords - heads + 0.5, 1.0) - 0.5
        assert gap == pytest.approx(np.zeros_like(gap), abs=1e-12)

    def test_flat_sample(self):
        metric, u_bar = sample_torus_mesh(ConformalTorus(), 8)
        l = metric.lengths
        assert np.all(np.isclose(l, 1 / 8, rtol=1e-12) | np.isclose(l, math.sqrt(5) / 16, rtol=1e-12))
        assert curvature_of(metric) == pytest.approx(np.zeros(64), abs=1e-12)
        assert total_area(metric) == pytest.approx(1.0, rel=1e-12)
        assert np.array_equal(u_bar, np.zeros(64))

    def test_bumpy_sample_is_acute(self):
        metric, _ = sample_torus_mesh(ConformalTorus(alpha=0.05), 8)
        assert metric.angles().max() < math.pi / 2


class TestDisk:
    """Test Poincare disk helpers."""

    def test_midpoint_is_equidistant(self):
        z = np.array([0.1 + 0.2j, -0.4 + 0.1j])
        w = np.array([0.5 - 0.3j, 0.3 + 0.6j])
        mid = disk_midpoint(z, w)
        half = 0.5 * disk_distance(z, w)
        assert disk_distance(z, mid) == pytest.approx(half, rel=1e-12)
        assert disk_distance(mid, w) == pytest.approx(half, rel=1e-12)

    def test_midpoint_of_a_point(self):
        z = np.array([0.3 + 0.1j])
        assert disk_midpoint(z, z) == pytest.approx(z)

    def test_center_triangles_are_equilateral(self):
        v, m = octagon_corners()
        side = math.acosh(1.0 + math.sqrt(2.0))
        assert disk_distance(0j, m[0]) == pytest.approx(side, rel=1e-12)
        assert disk_distance(m[0], m[1]) == pytest.approx(side, rel=1e-12)
        assert disk_distance(m[0], v[1]) == pytest.approx(side, rel=1e-12)


class TestGenus2:
    """Test the subdivided octagon surface."""

    def test_counts(self):
        metric, positions = genus2_mesh(2)
        tri = metric.triangulation
        assert (tri.vertex_count, tri.edge_count, tri.face_count) == (126, 384, 256)
        assert tri.genus == 2
        assert positions.shape == (126,)
        assert np.all(np.abs(positions) < 1.0)

    def test_flat_curvature_and_area(self):
        metric, _ = genus2_mesh(3)
        assert curvature_of(metric) == pytest.approx(np.zeros(metric.triangulation.vertex_count), abs=1e-10)
        assert total_area(metric) == pytest.approx(4.0 * math.pi, rel=1e-10)

    def test_level_zero(self):
        with pytest.raises(SubdivisionTooCoarse):
            genus2_mesh(0)

    def test_strict_rejects_long_edges(self):
        with pytest.raises(SubdivisionTooCoarse):
            sample_genus2_mesh(k=1)

    def test_working_level(self):
        metric = sample_genus2_mesh()
        assert metric.max_length < 0.1
        assert metric.triangulation.face_count == 16 * 4 ** 4

    def test_strict_rejects_curved_base(self, monkeypatch):
        metric, positions = genus2_mesh(4)
        curved = scale_lengths(metric, synthetic_factor(positions, 0.01))
        monkeypatch.setattr(surfaces, "genus2_mesh", lambda k: (curved, positions))
        with pytest.raises(SurfaceError, match="curvature") as exc:
            sample_genus2_mesh()
        assert not isinstance(exc.value, SubdivisionTooCoarse)
        assert sample_genus2_mesh(strict=False) is curved

    def test_synthetic_scaling(self):
        u = synthetic_factor(genus2_positions(2), 0.1)
        plain = sample_genus2_mesh(k=2, strict=False)
        scaled = sample_genus2_mesh(k=2, u_synthetic=u, strict=False)
        assert scaled.lengths.tolist() != plain.lengths.tolist()
        assert sample_genus2_mesh(k=2, u_synthetic=np.zeros_like(u), strict=False) is plain

    def test_synthetic_factor_values(self):
        z = np.array([0.5 + 0.0j, 0.0 + 0.5j])
        assert synthetic_factor(z, 0.2) == pytest.approx([0.2, 0.0], abs=1e-15)


class TestParseSurface:
    """Test surface spec strings."""

    def test_default_torus_preset(self):
        assert parse_surface("torus") == ConformalTorus(alpha=0.05, beta=0.0)

    def test_named_preset(self):
        assert parse_surface("torus:preset=mixed") == ConformalTorus(alpha=0.05, beta=0.03)

    def test_explicit_parameters(self):
        t = parse_surface("torus:amp=0.02,beta=0.01,offset=0.5")
        assert (t.alpha, t.beta, t.offset) == (0.02, 0.01, 0.5)

    def test_flat_torus(self):
        assert parse_surface("torus:amp=0").is_constant

    def test_genus2(self):
        s = parse_surface("genus2")
        assert isinstance(s, HyperbolicOctagonSurface)
        assert s.synthetic_amplitude is None
        assert s.label() == "genus2"

    def test_genus2_amplitude(self):
        s = parse_surface("genus2:amp=0.1")
        assert s.synthetic_amplitude == 0.1
        assert s.label() == "genus2:amp=0.1"

    @pytest.mark.parametrize("spec", [
        "sphere",
        "torus:amp",
        "torus:gamma=1",
        "torus:preset=nope",
        "genus2:beta=0.1",
    ])
    def test_invalid(self, spec):
        with pytest.raises(ValueError):
            parse_surface(spec)
