"""Shared fixtures."""

import numpy as np
import pytest

from discrete_uniformization.core.config import get_settings
from discrete_uniformization.core.constants import DEFAULT_SEED
from discrete_uniformization.core.mesh import MeshMetric, build_triangulation
from discrete_uniformization.core.models import Geometry
from discrete_uniformization.core.surfaces import equilateral_torus, grid_torus_faces

TETRAHEDRON = [(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)]


@pytest.fixture
def rng():
    return np.random.default_rng(DEFAULT_SEED)


@pytest.fixture(autouse=True)
def _fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def flat_torus() -> MeshMetric:
    """6 x 6 equilateral torus of area 1."""
    return equilateral_torus(6)


@pytest.fixture
def tetrahedron() -> MeshMetric:
    return MeshMetric(build_triangulation(TETRAHEDRON), np.ones(6), Geometry.EUCLIDEAN)


@pytest.fixture
def hyperbolic_grid() -> MeshMetric:
    """4 x 4 grid torus with hyperbolic lengths 0.3 (genus 1, for Jacobian checks)."""
    tri = build_triangulation(grid_torus_faces(4))
    return MeshMetric(tri, np.full(tri.edge_count, 0.3), Geometry.HYPERBOLIC)
