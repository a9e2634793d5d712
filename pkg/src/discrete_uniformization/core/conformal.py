"""
Vertex scaling, angle-defect curvature and the curvature Jacobian.

Euclidean scaling multiplies ``l_ij`` by ``exp((u_i + u_j) / 2)``; hyperbolic
scaling does the same to ``sinh(l_ij / 2)``. The Jacobian ``dK/du`` is
``-Lap_eta`` (Euclidean) or ``D - Lap_eta`` (hyperbolic) and is assembled two
ways: from per-edge weights (production) and from per-face angle partials.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from discrete_uniformization.core.graph import Graph, laplacian_matrix
from discrete_uniformization.core.mesh import MeshMetric
from discrete_uniformization.core.models import Geometry
from discrete_uniformization.core.triangle import conformal_partials_array

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EdgeWeights:
    """Per-edge pieces of the curvature Jacobian."""
    eta: np.ndarray
    w: np.ndarray | None = None
    D: np.ndarray | None = None
    tilde: np.ndarray | None = None


@dataclass(frozen=True)
class CurvatureJacobian:
    """Symmetric matrix dK/du with the weights it was assembled from."""
    geometry: Geometry
    weights: EdgeWeights
    matrix: sp.csr_matrix

    @property
    def eta(self) -> np.ndarray:
        return self.weights.eta

    @property
    def D(self) -> np.ndarray | None:
        return self.weights.D

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def _zero(m: MeshMetric, u: np.ndarray | None) -> np.ndarray:
    if u is None:
        return np.zeros(m.triangulation.vertex_count)
    u = np.asarray(u, dtype=float)
    if u.shape != (m.triangulation.vertex_count,):
        raise ValueError(f"expected {m.triangulation.vertex_count} conformal factors, got {u.shape}")
    return u


def scale_lengths(m: MeshMetric, u: np.ndarray | None = None) -> MeshMetric:
    """
    Apply vertex scaling to every edge.

    Raises:
        TriangleInequalityViolated: The scaled lengths break a face
    """
    u = _zero(m, u)
    if not np.any(u):
        return m
    edges = m.triangulation.edges
    factor = np.exp(0.5 * (u[edges[:, 0]] + u[edges[:, 1]]))
    if m.geometry == Geometry.EUCLIDEAN:
        lengths = factor * m.lengths
    else:
        lengths = 2.0 * np.arcsinh(factor * np.sinh(0.5 * m.lengths))
    return m.with_lengths(lengths)


def curvature_of(metric: MeshMetric) -> np.ndarray:
    """Angle defect ``2 pi - sum of corner angles`` at each vertex."""
    t = metric.triangulation
    theta = metric.angles()
    total = np.bincount(t.faces.ravel(), weights=theta.ravel(), minlength=t.vertex_count)
    return 2.0 * np.pi - total


def curvature(m: MeshMetric, u: np.ndarray | None = None) -> np.ndarray:
    """Discrete curvature of the scaled metric."""
    return curvature_of(scale_lengths(m, u))


def edge_weights(metric: MeshMetric) -> EdgeWeights:
    """
    Cotangent-type weights at the current (already scaled) metric.

    Euclidean: ``eta = (cot a + cot a') / 2`` over the two angles facing the edge.
    Hyperbolic: ``w`` is the same sum over the tilde angles, ``eta = w (1 - t)``
    and ``D_i = sum over edges at i of 2 w t``, with ``t = tanh^2(l / 2)``.
    """
    t = metric.triangulation
    theta = metric.angles()
    f0, c0 = t.edge_faces[:, 0], t.edge_corners[:, 0]
    f1, c1 = t.edge_faces[:, 1], t.edge_corners[:, 1]

    if metric.geometry == Geometry.EUCLIDEAN:
        eta = 0.5 / np.tan(theta[f0, c0]) + 0.5 / np.tan(theta[f1, c1])
        return EdgeWeights(eta=eta)

    tilde = 0.5 * (np.pi + 2.0 * theta - theta.sum(axis=1, keepdims=True))
    w = 0.5 / np.tan(tilde[f0, c0]) + 0.5 / np.tan(tilde[f1, c1])
    tt = np.tanh(0.5 * metric.lengths) ** 2
    eta = w * (1.0 - tt)
    D = np.zeros(t.vertex_count)
    np.add.at(D, t.edges[:, 0], 2.0 * w * tt)
    np.add.at(D, t.edges[:, 1], 2.0 * w * tt)
    return EdgeWeights(eta=eta, w=w, D=D, tilde=tilde)


def jacobian_of(metric: MeshMetric, graph: Graph | None = None) -> CurvatureJacobian:
    """Closed-form curvature Jacobian at an already scaled metric."""
    weights = edge_weights(metric)
    g = graph or metric.triangulation.graph()
    minus_lap = -laplacian_matrix(g, weights.eta)
    if metric.geometry == Geometry.HYPERBOLIC:
        minus_lap = minus_lap + sp.diags(weights.D)
    return CurvatureJacobian(metric.geometry, weights, minus_lap.tocsr())


def curvature_jacobian(m: MeshMetric, u: np.ndarray | None = None) -> CurvatureJacobian:
    """
    dK/du at ``u``: ``-Lap_eta`` (Euclidean) or ``D - Lap_eta`` (hyperbolic).

    Raises:
        TriangleInequalityViolated: The scaled lengths break a face
    """
    return jacobian_of(scale_lengths(m, u))


def jacobian_from_partials(m: MeshMetric, u: np.ndarray | None = None) -> sp.csr_matrix:
    """dK/du summed face by face from the per-triangle conformal angle partials."""
    metric = scale_lengths(m, u)
    t = metric.triangulation
    P = conformal_partials_array(metric.face_lengths(), metric.geometry)
    rows = np.repeat(t.faces, 3, axis=1).ravel()
    cols = np.tile(t.faces, (1, 3)).ravel()
    n = t.vertex_count
    return sp.coo_matrix((-P.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def total_area(metric: MeshMetric) -> float:
    """Sum of face areas of a metric."""
    return float(metric.face_areas().sum())


def gauss_bonnet_defect(metric: MeshMetric) -> float:
    """``sum K - 2 pi chi`` minus the hyperbolic area (zero for an exact identity)."""
    K = curvature_of(metric)
    expected = 2.0 * np.pi * metric.triangulation.euler_characteristic
    if metric.geometry == Geometry.HYPERBOLIC:
        expected += total_area(metric)
    return float(K.sum() - expected)

