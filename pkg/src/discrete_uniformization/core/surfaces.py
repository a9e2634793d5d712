"""
Analytic test surfaces with known uniformization factors.

Torus meshes live on the unit-square torus with metric ``exp(2 phi) delta``.
Vertices form the triangular lattice spanned by ``(1/n, 0)`` and
``(1/(2n), 1/n)``, so every flat triangle is acute (a square grid cut along a
diagonal has right angles and is never strictly Delaunay).

The genus-2 mesh starts from the regular octagon with interior angles pi/4 in
the Poincare disk, cut into 16 equilateral triangles of angle pi/4 (eight
around the center, one at each corner). Side pairing 0-2, 1-3, 4-6, 5-7
(reversed) closes it up into a genus-2 surface with K = 0 at every vertex.
Each triangle is midpoint-subdivided k times with exact hyperbolic midpoints.
"""

import logging
import math
from functools import lru_cache
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field

from discrete_uniformization.core.config import torus_presets
from discrete_uniformization.core.constants import GENUS2_MAX_EDGE, K0, OCTAGON_SIDES
from discrete_uniformization.core.errors import MeshError, SubdivisionTooCoarse, SurfaceError
from discrete_uniformization.core.geodesic import ConformalTorus, geodesic_distances
from discrete_uniformization.core.mesh import MeshMetric, Triangulation, build_triangulation, check_metric
from discrete_uniformization.core.models import CubicEstimateReport, GeodesicSolverOptions, Geometry

logger = logging.getLogger(__name__)


class HyperbolicOctagonSurface(BaseModel):
    """Genus-2 surface from the regular pi/4 octagon, with an optional synthetic factor."""
    subdivision: int = Field(default=K0, ge=1)
    synthetic_amplitude: Optional[float] = Field(default=None, ge=0)

    def label(self) -> str:
        if self.synthetic_amplitude is None:
            return "genus2"
        return f"genus2:amp={self.synthetic_amplitude!r}"


# ===== Torus =====

def grid_torus_faces(n: int) -> np.ndarray:
    """Faces of the n x n torus grid with each square cut along one diagonal."""
    a, b = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    a, b = a.ravel(), b.ravel()
    vid = lambda i, j: (j % n) * n + (i % n)  # noqa: E731
    up = np.stack([vid(a, b), vid(a + 1, b), vid(a + 1, b + 1)], axis=1)
    down = np.stack([vid(a, b), vid(a + 1, b + 1), vid(a, b + 1)], axis=1)
    return np.concatenate([up, down])


def equilateral_torus(n: int, unit_area: bool = True) -> MeshMetric:
    """Grid torus with all edges equal: flat, with six angles of pi/3 at every vertex."""
    tri = build_triangulation(grid_torus_faces(n))
    side = math.sqrt(4.0 / (math.sqrt(3.0) * tri.face_count)) if unit_area else 1.0
    return MeshMetric(tri, np.full(tri.edge_count, side), Geometry.EUCLIDEAN)


def _lattice_vid(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    # (a, b + n) is the point (a + n/2, b)
    wraps = np.floor_divide(b, n)
    return np.mod(b, n) * n + np.mod(a + wraps * (n // 2), n)


def torus_lattice(n: int) -> tuple[Triangulation, np.ndarray, np.ndarray, np.ndarray]:
    """
    Sheared lattice triangulation of the unit-square torus.

    Returns:
        (triangulation, vertex positions (V, 2), per-edge tail positions (E, 2),
        per-edge chord vectors (E, 2) in the universal cover)
    """
    if n < 4 or n % 2:
        raise ValueError(f"torus lattice needs an even n >= 4, got {n}")
    a, b = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    a, b = a.ravel(), b.ravel()
    vid = lambda i, j: _lattice_vid(i, j, n)  # noqa: E731

    up = np.stack([vid(a, b), vid(a + 1, b), vid(a, b + 1)], axis=1)
    down = np.stack([vid(a + 1, b), vid(a + 1, b + 1), vid(a, b + 1)], axis=1)
    tri = build_triangulation(np.concatenate([up, down]), n * n)

    positions = np.zeros((n * n, 2))
    ids = vid(a, b)
    positions[ids, 0] = np.mod(a / n + b / (2 * n), 1.0)
    positions[ids, 1] = b / n

    e1 = np.array([1.0 / n, 0.0])
    e2 = np.array([0.5 / n, 1.0 / n])
    starts, ends, chords = [], [], []
    for (da, db), vec in (((1, 0), e1), ((0, 1), e2), ((-1, 1), e2 - e1)):
        starts.append(ids)
        ends.append(vid(a + da, b + db))
        chords.append(np.broadcast_to(vec, (len(ids), 2)))
    start, end = np.concatenate(starts), np.concatenate(ends)
    chord = np.concatenate(chords).copy()

    # orient every edge from its lower to its higher vertex id
    swap = start > end
    tail_ids = np.where(swap, end, start)
    head_ids = np.where(swap, start, end)
    chord[swap] *= -1.0
    tails = positions[tail_ids]

    keys = tail_ids * (n * n) + head_ids
    tri_keys = tri.edges[:, 0] * (n * n) + tri.edges[:, 1]
    order = np.searchsorted(tri_keys, keys)
    edge_tails = np.empty_like(tails)
    edge_chords = np.empty_like(chord)
    edge_tails[order] = tails
    edge_chords[order] = chord
    return tri, positions, edge_tails, edge_chords


def sample_torus_mesh(
    t: ConformalTorus,
    n: int,
    opts: GeodesicSolverOptions | None = None,
    num_workers: int | None = None,
) -> tuple[MeshMetric, np.ndarray]:
    """
    Geodesic lattice mesh of the conformal torus and the exact factor at its vertices.

    Raises:
        GeodesicSolverFailed: Polyline relaxation did not converge
    """
    tri, positions, tails, chords = torus_lattice(n)
    lengths = geodesic_distances(t, tails, chords, opts, num_workers)
    u_bar = t.uniformizing_factor(positions)
    logger.info(f"Sampled torus n={n}: {tri!r}, max length {lengths.max():.4g}")
    return MeshMetric(tri, lengths, Geometry.EUCLIDEAN), u_bar


# ===== Genus 2 =====

def disk_distance(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Hyperbolic distance in the Poincare disk."""
    return 2.0 * np.arctanh(np.abs(z - w) / np.abs(1.0 - np.conj(z) * w))


def disk_midpoint(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Hyperbolic midpoint of the geodesic from z to w."""
    moved = (w - z) / (1.0 - np.conj(z) * w)
    rho = np.abs(moved)
    # tanh(artanh(rho) / 2)
    half = rho / (1.0 + np.sqrt(1.0 - rho ** 2))
    scaled = np.where(rho > 0, moved * (half / np.where(rho > 0, rho, 1.0)), 0.0)
    return (scaled + z) / (1.0 + np.conj(z) * scaled)


def octagon_corners() -> tuple[np.ndarray, np.ndarray]:
    """Disk coordinates of the octagon corners v_i and side midpoints m_i."""
    cot = 1.0 / math.tan(math.pi / OCTAGON_SIDES)
    R = math.acosh(cot ** 2)  # circumradius
    r = math.acosh(cot)  # inradius
    k = np.arange(OCTAGON_SIDES)
    step = 2.0 * math.pi / OCTAGON_SIDES
    v = math.tanh(R / 2) * np.exp(1j * step * k)
    m = math.tanh(r / 2) * np.exp(1j * step * (k + 0.5))
    return v, m


def _paired_side(j: int) -> int:
    return {0: 2, 2: 0, 1: 3, 3: 1, 4: 6, 6: 4, 5: 7, 7: 5}[j]


def _base_faces() -> list[tuple[tuple, tuple, tuple]]:
    """Sixteen base triangles as corner labels ("C",), ("v", i), ("m", i)."""
    n = OCTAGON_SIDES
    faces = [(("C",), ("m", i), ("m", (i + 1) % n)) for i in range(n)]
    faces += [(("m", (i - 1) % n), ("v", i), ("m", i)) for i in range(n)]
    return faces


def _side_key(j: int, tau: int, N: int) -> tuple:
    """Point tau steps from v_j along side j (v_j -> v_{j+1}), 2N steps long."""
    if tau in (0, 2 * N):
        return ("P",)
    partner = _paired_side(j)
    if partner < j:
        j, tau = partner, 2 * N - tau
    if tau == N:
        return ("m", j)
    return ("side", j, tau)


def _corner_key(label: tuple) -> tuple:
    if label[0] == "C":
        return ("C",)
    if label[0] == "v":
        return ("P",)
    return ("m", min(label[1], _paired_side(label[1])))


def _edge_point_key(A: tuple, B: tuple, t: int, N: int) -> tuple:
    """Point t steps from corner A toward corner B on a base edge of N steps."""
    n = OCTAGON_SIDES
    if B[0] == "C" or B[0] == "v" or (A[0] == "m" and B[0] == "m" and B[1] == (A[1] - 1) % n):
        A, B, t = B, A, N - t
    if A[0] == "C":
        return ("spoke", B[1], t)
    if A[0] == "m":
        return ("inner", A[1], t)
    j = A[1]
    if B[1] == j:
        # v_j -> m_j is the first half of side j
        return _side_key(j, t, N)
    # v_j -> m_{j-1} runs backwards along side j - 1, which ends at v_j
    return _side_key((j - 1) % n, 2 * N - t, N)


def _point_key(face: int, corners: tuple, p: int, q: int, r: int, N: int) -> tuple:
    weights = (p, q, r)
    nonzero = [i for i in range(3) if weights[i] > 0]
    if len(nonzero) == 1:
        return _corner_key(corners[nonzero[0]])
    if len(nonzero) == 2:
        i, j = nonzero
        return _edge_point_key(corners[i], corners[j], weights[j], N)
    return ("face", face, p, q, r)


def _subdivide(corners: np.ndarray, k: int) -> np.ndarray:
    """Disk coordinates Z[q, r] of the level-k grid (q toward corner 1, r toward corner 2)."""
    Z = np.zeros((2, 2), dtype=complex)
    Z[0, 0], Z[1, 0], Z[0, 1] = corners
    for _ in range(k):
        M = 2 * (Z.shape[0] - 1)
        new = np.zeros((M + 1, M + 1), dtype=complex)
        new[0::2, 0::2] = Z
        new[1::2, 0::2] = disk_midpoint(new[0:-1:2, 0::2], new[2::2, 0::2])
        new[0::2, 1::2] = disk_midpoint(new[0::2, 0:-1:2], new[0::2, 2::2])
        new[1::2, 1::2] = disk_midpoint(new[2::2, 0:-1:2], new[0:-1:2, 2::2])
        Z = new
    return Z


def _corner_coordinate(label: tuple, v: np.ndarray, m: np.ndarray) -> complex:
    if label[0] == "C":
        return 0j
    return complex(v[label[1]] if label[0] == "v" else m[label[1]])


def _grid_triangles(N: int) -> np.ndarray:
    """``(N^2, 3, 2)`` grid coordinates (q, r) of the level-N sub-triangles, counterclockwise."""
    out = []
    for q in range(N):
        for r in range(N - q):
            out.append([(q, r), (q + 1, r), (q, r + 1)])
            if q + r <= N - 2:
                out.append([(q + 1, r), (q + 1, r + 1), (q, r + 1)])
    return np.array(out, dtype=np.int64)


@lru_cache(maxsize=4)
def genus2_mesh(k: int) -> tuple[MeshMetric, np.ndarray]:
    """
    Exact globally hyperbolic genus-2 mesh at subdivision level k.

    Returns:
        (metric, disk coordinate of each vertex's first occurrence)

    Raises:
        SubdivisionTooCoarse: The level is too coarse to give a simplicial surface
    """
    if k < 1:
        raise SubdivisionTooCoarse(f"subdivision level {k} does not give a simplicial mesh")
    N = 2 ** k
    v, m = octagon_corners()
    grid = _grid_triangles(N)
    gq, gr = grid[..., 0], grid[..., 1]

    ids: dict[tuple, int] = {}
    positions: list[complex] = []
    faces, sides = [], []
    for f, corners in enumerate(_base_faces()):
        Z = _subdivide(np.array([_corner_coordinate(c, v, m) for c in corners]), k)
        local = np.full((N + 1, N + 1), -1, dtype=np.int64)
        for q in range(N + 1):
            for r in range(N + 1 - q):
                key = _point_key(f, corners, N - q - r, q, r, N)
                if key not in ids:
                    ids[key] = len(ids)
                    positions.append(complex(Z[q, r]))
                local[q, r] = ids[key]

        z = Z[gq, gr]
        faces.append(local[gq, gr])
        sides.append(np.stack([
            disk_distance(z[:, 1], z[:, 2]),
            disk_distance(z[:, 2], z[:, 0]),
            disk_distance(z[:, 0], z[:, 1]),
        ], axis=1))

    F = np.concatenate(faces)
    L = np.concatenate(sides)
    try:
        tri = build_triangulation(F, len(ids))
    except MeshError as e:
        raise SubdivisionTooCoarse(f"level {k} is not a valid surface: {e}") from e

    V = tri.vertex_count
    opp = [(F[:, 1], F[:, 2]), (F[:, 2], F[:, 0]), (F[:, 0], F[:, 1])]
    keys = np.concatenate([np.minimum(i, j) * V + np.maximum(i, j) for i, j in opp])
    values = np.concatenate([L[:, 0], L[:, 1], L[:, 2]])
    tri_keys = tri.edges[:, 0] * V + tri.edges[:, 1]
    _, first = np.unique(keys, return_index=True)
    lengths = np.empty(tri.edge_count)
    lengths[np.searchsorted(tri_keys, keys[first])] = values[first]

    metric = MeshMetric(tri, lengths, Geometry.HYPERBOLIC)
    pos = np.array(positions)
    pos.setflags(write=False)
    logger.info(f"Built genus-2 mesh k={k}: {tri!r}, max length {lengths.max():.4g}")
    return metric, pos


def synthetic_factor(positions: np.ndarray, amplitude: float) -> np.ndarray:
    """Smooth test factor ``amplitude sin(pi x) cos(pi y)`` on disk coordinates."""
    return amplitude * np.sin(np.pi * positions.real) * np.cos(np.pi * positions.imag)


def sample_genus2_mesh(
    s: HyperbolicOctagonSurface | None = None,
    k: int | None = None,
    u_synthetic: np.ndarray | None = None,
    strict: bool = True,
    regularity_floor: tuple[float, float] = (1e-3, 1e-3),
    curvature_tol: float = 1e-10,
) -> MeshMetric:
    """
    Genus-2 hyperbolic mesh, optionally scaled by ``u_synthetic``.

    The exact uniformization factor of the returned metric is ``-u_synthetic``.

    Raises:
        SubdivisionTooCoarse: With ``strict``, an edge is at least 0.1 long or
            the mesh is below the regularity floor
        SurfaceError: With ``strict``, the unscaled mesh has ``|K|inf > curvature_tol``
    """
    from discrete_uniformization.core.conformal import curvature_of, scale_lengths

    s = s or HyperbolicOctagonSurface()
    level = s.subdivision if k is None else k
    metric, _ = genus2_mesh(level)
    if strict:
        if metric.max_length >= GENUS2_MAX_EDGE:
            raise SubdivisionTooCoarse(
                f"level {level} has edges of length {metric.max_length:.4g} >= {GENUS2_MAX_EDGE}"
            )
        report = check_metric(metric)
        if not report.is_regular(*regularity_floor):
            raise SubdivisionTooCoarse(f"level {level} is below the regularity floor")
        residual = float(np.max(np.abs(curvature_of(metric))))
        if residual > curvature_tol:
            raise SurfaceError(f"level {level} has curvature {residual:.3e} > {curvature_tol:.1e}")
    if u_synthetic is None or not np.any(u_synthetic):
        return metric
    return scale_lengths(metric, u_synthetic)


def genus2_positions(k: int) -> np.ndarray:
    """Disk coordinates of the level-k genus-2 vertices."""
    return genus2_mesh(k)[1]


# ===== Cubic estimate =====

def scaled_pairs(
    center: tuple[float, float], direction: tuple[float, float], distances: list[float]
) -> tuple[np.ndarray, np.ndarray]:
    """Point pairs symmetric about ``center`` along ``direction`` at the given flat distances."""
    c = np.asarray(center, dtype=float)
    e = np.asarray(direction, dtype=float)
    e = e / np.linalg.norm(e)
    d = np.asarray(distances, dtype=float)[:, None]
    return c - 0.5 * d * e, c + 0.5 * d * e


def verify_cubic_estimate(
    t: ConformalTorus,
    pairs: tuple[np.ndarray, np.ndarray],
    opts: GeodesicSolverOptions | None = None,
) -> CubicEstimateReport:
    """
    Deviation ``|d_flat(x, y) - exp((u(x) + u(y)) / 2) d_g(x, y)|`` with ``u = -phi``.

    ``exp(2u) g`` is the flat torus, so its distance is the chord length.
    """
    x, y = (np.atleast_2d(np.asarray(p, dtype=float)) for p in pairs)
    chord = y - x
    d_g = geodesic_distances(t, x, chord, opts)
    d_flat = np.linalg.norm(chord, axis=1)
    scale = np.exp(0.5 * (t.uniformizing_factor(x) + t.uniformizing_factor(y)))
    deviation = np.abs(d_flat - scale * d_g)
    ratio = deviation / d_g ** 3
    with np.errstate(divide="ignore", invalid="ignore"):
        halving = deviation[:-1] / deviation[1:]
    return CubicEstimateReport(
        distances=d_g.tolist(),
        deviations=deviation.tolist(),
        ratios=ratio.tolist(),
        max_ratio=float(ratio.max()),
        halving_ratios=halving.tolist(),
    )


# ===== Presets =====

def parse_surface(spec: str) -> ConformalTorus | HyperbolicOctagonSurface:
    """
    Parse ``torus[:amp=..,beta=..,offset=..,preset=..]`` or ``genus2[:amp=..]``.

    Raises:
        ValueError: Unknown surface or parameter
    """
    name, _, rest = spec.partition(":")
    params: dict[str, str] = {}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"expected key=value in surface spec, got {item!r}")
        params[key.strip()] = value.strip()

    name = name.strip().lower()
    if name == "torus":
        presets = torus_presets()
        preset = params.pop("preset", None if params else "default")
        base = dict(presets.get(preset, {})) if preset else {}
        if preset and preset not in presets:
            raise ValueError(f"unknown torus preset {preset!r}")
        mapping = {"amp": "alpha", "alpha": "alpha", "beta": "beta", "offset": "offset"}
        for key, value in params.items():
            if key not in mapping:
                raise ValueError(f"unknown torus parameter {key!r}")
            base[mapping[key]] = float(value)
        return ConformalTorus(**base)
    if name == "genus2":
        amp = float(params.pop("amp")) if "amp" in params else None
        if params:
            raise ValueError(f"unknown genus2 parameters {sorted(params)}")
        return HyperbolicOctagonSurface(synthetic_amplitude=amp)
    raise ValueError(f"unknown surface {name!r}")
