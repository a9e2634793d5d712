"""
Closed triangle meshes: combinatorics, edge-length metrics and regularity.

A ``Triangulation`` is built once by ``build_triangulation`` and never mutated.
Edges are unordered vertex pairs stored in canonical ``(min, max)`` order.
For face ``f`` and corner ``c``, ``face_edges[f, c]`` is the edge opposite the
corner, so column ``c`` of ``MeshMetric.face_lengths()`` is the side opposite
vertex ``faces[f, c]``.
"""

import logging
from collections import deque

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from discrete_uniformization.core.constants import TRIANGLE_SLACK
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
from discrete_uniformization.core.graph import Graph
from discrete_uniformization.core.models import Geometry, RegularityReport
from discrete_uniformization.core.triangle import corner_angles, degenerate_mask, face_areas

logger = logging.getLogger(__name__)


class Triangulation:
    """Closed, orientable, connected simplicial surface."""

    def __init__(
        self,
        vertex_count: int,
        faces: np.ndarray,
        edges: np.ndarray,
        face_edges: np.ndarray,
        edge_faces: np.ndarray,
        edge_corners: np.ndarray,
    ):
        self.vertex_count = int(vertex_count)
        self.faces = faces
        self.edges = edges
        self.face_edges = face_edges
        self.edge_faces = edge_faces
        self.edge_corners = edge_corners
        for arr in (faces, edges, face_edges, edge_faces, edge_corners):
            arr.setflags(write=False)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def euler_characteristic(self) -> int:
        return self.vertex_count - self.edge_count + self.face_count

    @property
    def genus(self) -> int:
        return (2 - self.euler_characteristic) // 2

    def vertex_degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.vertex_count)

    def directed_edges(self) -> np.ndarray:
        """``(3F, 2)`` array of oriented face boundary edges."""
        f = self.faces
        return np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])

    def graph(self) -> Graph:
        """Edge graph of the mesh."""
        return Graph(self.vertex_count, self.edges)

    def __repr__(self) -> str:
        return (
            f"Triangulation(V={self.vertex_count}, E={self.edge_count}, "
            f"F={self.face_count}, genus={self.genus})"
        )


def _edge_keys(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    return np.minimum(a, b) * n + np.maximum(a, b)


def _orient(faces: np.ndarray, edge_faces: np.ndarray, same_direction: np.ndarray) -> np.ndarray:
    """Flip faces so that every interior edge is traversed once each way."""
    F = len(faces)
    neighbors: list[list[tuple[int, bool]]] = [[] for _ in range(F)]
    for (f, g), same in zip(edge_faces.tolist(), same_direction.tolist()):
        neighbors[f].append((g, same))
        neighbors[g].append((f, same))

    flip = np.full(F, -1, dtype=np.int8)
    for root in range(F):
        if flip[root] >= 0:
            continue
        flip[root] = 0
        queue = deque([root])
        while queue:
            f = queue.popleft()
            for g, same in neighbors[f]:
                want = flip[f] ^ int(same)
                if flip[g] < 0:
                    flip[g] = want
                    queue.append(g)
                elif flip[g] != want:
                    raise NonOrientable("no consistent orientation of the faces exists")

    out = faces.copy()
    rows = flip == 1
    out[rows] = out[rows][:, [0, 2, 1]]
    logger.debug(f"Re-oriented {int(rows.sum())} of {F} faces")
    return out


def build_triangulation(faces, vertex_count: int | None = None) -> Triangulation:
    """
    Validate faces and build adjacency tables.

    Args:
        faces: Sequence of vertex triples with indices dense in [0, V)
        vertex_count: V (defaults to max index + 1)

    Returns:
        Triangulation with faces consistently oriented

    Raises:
        NonSimplicial: Bad shape, index out of range, or a repeated vertex in a face
        NonManifoldEdge: An edge is not in exactly two faces
        DuplicateFace: A vertex triple appears twice
        NonManifoldVertex: The faces around a vertex form more than one fan
        NonOrientable: No consistent orientation exists
        Disconnected: The edge graph is not connected
    """
    F_arr = np.asarray(faces)
    if F_arr.ndim != 2 or F_arr.shape[1] != 3 or len(F_arr) == 0:
        raise NonSimplicial("faces must be a nonempty list of vertex triples")
    if not np.issubdtype(F_arr.dtype, np.integer):
        raise NonSimplicial("vertex indices must be integers")
    F_arr = F_arr.astype(np.int64)
    n = int(F_arr.max()) + 1 if vertex_count is None else int(vertex_count)
    if F_arr.min() < 0 or F_arr.max() >= n:
        raise NonSimplicial(f"vertex indices must lie in [0, {n})")

    repeated = (F_arr[:, 0] == F_arr[:, 1]) | (F_arr[:, 1] == F_arr[:, 2]) | (F_arr[:, 2] == F_arr[:, 0])
    if np.any(repeated):
        f = int(np.flatnonzero(repeated)[0])
        raise NonSimplicial(f"face {f} {tuple(F_arr[f])} repeats a vertex")

    # half-edge c of face f is opposite corner c
    nF = len(F_arr)
    tail = np.concatenate([F_arr[:, 1], F_arr[:, 2], F_arr[:, 0]])
    head = np.concatenate([F_arr[:, 2], F_arr[:, 0], F_arr[:, 1]])
    half_face = np.tile(np.arange(nF), 3)
    half_corner = np.repeat(np.arange(3), nF)

    keys = _edge_keys(tail, head, n)
    unique_keys, edge_of_half, counts = np.unique(keys, return_inverse=True, return_counts=True)
    if np.any(counts != 2):
        e = int(np.flatnonzero(counts != 2)[0])
        k = int(unique_keys[e])
        raise NonManifoldEdge((k // n, k % n), int(counts[e]))

    sorted_faces = np.sort(F_arr, axis=1)
    _, first, face_counts = np.unique(sorted_faces, axis=0, return_index=True, return_counts=True)
    if np.any(face_counts > 1):
        f = int(first[np.flatnonzero(face_counts > 1)[0]])
        raise DuplicateFace(tuple(int(v) for v in F_arr[f]))

    edges = np.stack([unique_keys // n, unique_keys % n], axis=1)
    nE = len(edges)

    # vertex links: join the two half-slots (v, x) and (v, y) of each corner at v
    slot_side = lambda v, e: np.where(edges[e, 0] == v, 0, 1)  # noqa: E731
    e_ab = edge_of_half[2 * nF:].copy()  # edge (F0, F1) opposite corner 2
    e_bc = edge_of_half[:nF].copy()
    e_ca = edge_of_half[nF:2 * nF].copy()
    link_rows, link_cols = [], []
    for v, e1, e2 in ((F_arr[:, 0], e_ab, e_ca), (F_arr[:, 1], e_ab, e_bc), (F_arr[:, 2], e_bc, e_ca)):
        link_rows.append(2 * e1 + slot_side(v, e1))
        link_cols.append(2 * e2 + slot_side(v, e2))
    rows, cols = np.concatenate(link_rows), np.concatenate(link_cols)
    link = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(2 * nE, 2 * nE))
    _, labels = connected_components(link, directed=False)
    slot_vertex = edges.ravel()
    fans = np.unique(np.stack([slot_vertex, labels], axis=1), axis=0)
    fans_per_vertex = np.bincount(fans[:, 0], minlength=n)
    if np.any(fans_per_vertex > 1):
        raise NonManifoldVertex(int(np.flatnonzero(fans_per_vertex > 1)[0]))

    order = np.argsort(edge_of_half, kind="stable")
    pair_face = half_face[order].reshape(nE, 2)
    pair_corner = half_corner[order].reshape(nE, 2)
    pair_tail = tail[order].reshape(nE, 2)
    same_direction = pair_tail[:, 0] == pair_tail[:, 1]
    if np.any(same_direction):
        F_arr = _orient(F_arr, pair_face, same_direction)
        return build_triangulation(F_arr, n)

    adjacency = sp.coo_matrix(
        (np.ones(nE), (edges[:, 0], edges[:, 1])), shape=(n, n)
    )
    n_components, _ = connected_components(adjacency, directed=False)
    if n_components != 1:
        raise Disconnected(n_components)

    face_edges = edge_of_half.reshape(3, nF).T.copy()
    tri = Triangulation(n, F_arr, edges, face_edges, pair_face.copy(), pair_corner.copy())
    logger.debug(f"Built {tri!r}")
    return tri


class MeshMetric:
    """Triangulation with positive edge lengths and a background geometry."""

    def __init__(self, triangulation: Triangulation, lengths: np.ndarray, geometry: Geometry):
        lengths = np.array(lengths, dtype=float)
        if lengths.shape != (triangulation.edge_count,):
            raise MeshError(
                f"expected {triangulation.edge_count} edge lengths, got {lengths.shape}"
            )
        if geometry == Geometry.SPHERICAL:
            raise MeshError("spherical meshes are not supported")
        self.triangulation = triangulation
        self.lengths = lengths
        self.geometry = Geometry(geometry)
        self.lengths.setflags(write=False)

        bad = degenerate_mask(self.face_lengths(), self.geometry)
        if np.any(bad):
            f = int(np.flatnonzero(bad)[0])
            raise TriangleInequalityViolated(f, tuple(float(v) for v in self.face_lengths()[f]))

    def face_lengths(self) -> np.ndarray:
        """``(F, 3)`` lengths; column c is opposite corner c."""
        return self.lengths[self.triangulation.face_edges]

    def with_lengths(self, lengths: np.ndarray) -> "MeshMetric":
        return MeshMetric(self.triangulation, lengths, self.geometry)

    def angles(self) -> np.ndarray:
        """``(F, 3)`` corner angles."""
        return corner_angles(self.face_lengths(), self.geometry)

    def face_areas(self) -> np.ndarray:
        return face_areas(self.face_lengths(), self.geometry)

    def opposite_angle_sums(self, theta: np.ndarray | None = None) -> np.ndarray:
        """Per edge, the sum of the two angles facing it."""
        theta = self.angles() if theta is None else theta
        t = self.triangulation
        return theta[t.edge_faces[:, 0], t.edge_corners[:, 0]] + theta[t.edge_faces[:, 1], t.edge_corners[:, 1]]

    @property
    def max_length(self) -> float:
        return float(self.lengths.max())


def check_metric(m: MeshMetric) -> RegularityReport:
    """
    Minimum inner angle and maximum opposite-angle sum of a metric.

    Raises:
        TriangleInequalityViolated: A face is degenerate beyond the strictness margin
    """
    L = m.face_lengths()
    a, b, c = L[:, 0], L[:, 1], L[:, 2]
    slack = TRIANGLE_SLACK * L.max(axis=1)
    bad = (b + c - a < slack) | (c + a - b < slack) | (a + b - c < slack)
    if np.any(bad):
        f = int(np.flatnonzero(bad)[0])
        raise TriangleInequalityViolated(f, tuple(float(v) for v in L[f]))

    theta = corner_angles(L, m.geometry)
    sums = m.opposite_angle_sums(theta)
    worst_face = int(np.argmin(theta.min(axis=1)))
    worst_edge = int(np.argmax(sums))
    return RegularityReport(
        min_angle=float(theta[worst_face].min()),
        max_opposite_angle_sum=float(sums[worst_edge]),
        worst_face=worst_face,
        worst_edge=worst_edge,
    )
