"""
Mesh file formats.

TML ("mesh with lengths") layout::

    tml 1
    V F
    i j k        # F face lines, 0-based
    i j length   # E edge lines, canonical (i < j, sorted) order

Whitespace separated; ``#`` starts a comment. The format carries no geometry
tag: readers take one explicitly or infer it from the genus.

OFF input gives 3D coordinates; edge lengths are chordal distances, an
approximation of geodesic lengths.
"""

import logging
from pathlib import Path

import numpy as np

from discrete_uniformization.core.errors import MeshError, MeshParseError
from discrete_uniformization.core.mesh import MeshMetric, Triangulation, build_triangulation
from discrete_uniformization.core.models import Geometry

logger = logging.getLogger(__name__)


def _content_lines(text: str) -> list[list[str]]:
    lines = []
    for raw in text.splitlines():
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append(body.split())
    return lines


def infer_geometry(t: Triangulation) -> Geometry:
    """Hyperbolic for genus > 1, Euclidean otherwise."""
    return Geometry.HYPERBOLIC if t.genus > 1 else Geometry.EUCLIDEAN


def parse_tml(text: str, geometry: Geometry | None = None) -> MeshMetric:
    """
    Parse TML text into a MeshMetric.

    Raises:
        MeshParseError: Malformed text or an invalid mesh
    """
    lines = _content_lines(text)
    if not lines or lines[0] != ["tml", "1"]:
        raise MeshParseError("missing 'tml 1' header")
    try:
        V, F = (int(v) for v in lines[1])
    except (IndexError, ValueError) as e:
        raise MeshParseError("second line must be 'V F'") from e

    face_lines = lines[2:2 + F]
    edge_lines = lines[2 + F:]
    if len(face_lines) != F or any(len(row) != 3 for row in face_lines):
        raise MeshParseError(f"expected {F} face lines of three indices")
    try:
        faces = np.array([[int(v) for v in row] for row in face_lines], dtype=np.int64)
        edge_rows = [(int(i), int(j), float(x)) for i, j, x in edge_lines]
    except ValueError as e:
        raise MeshParseError(f"bad number in TML body: {e}") from e

    try:
        tri = build_triangulation(faces, V)
    except MeshError as e:
        raise MeshParseError(f"invalid triangulation: {e}") from e

    if len(edge_rows) != tri.edge_count:
        raise MeshParseError(f"expected {tri.edge_count} edge lines, got {len(edge_rows)}")
    index = {(int(i), int(j)): e for e, (i, j) in enumerate(tri.edges.tolist())}
    lengths = np.full(tri.edge_count, np.nan)
    for i, j, x in edge_rows:
        e = index.get((min(i, j), max(i, j)))
        if e is None:
            raise MeshParseError(f"edge ({i}, {j}) is not an edge of the mesh")
        lengths[e] = x
    if np.any(np.isnan(lengths)):
        raise MeshParseError("some edges have no length")

    geometry = infer_geometry(tri) if geometry is None else Geometry(geometry)
    try:
        return MeshMetric(tri, lengths, geometry)
    except MeshError as e:
        raise MeshParseError(f"invalid metric: {e}") from e


def format_tml(m: MeshMetric) -> str:
    """Canonical TML text for a metric."""
    t = m.triangulation
    out = ["tml 1", f"{t.vertex_count} {t.face_count}"]
    out.extend(f"{i} {j} {k}" for i, j, k in t.faces.tolist())
    out.extend(f"{i} {j} {float(x)!r}" for (i, j), x in zip(t.edges.tolist(), m.lengths))
    return "\n".join(out) + "\n"


def parse_off(text: str, geometry: Geometry | None = None) -> MeshMetric:
    """
    Parse an OFF triangle mesh; lengths are chordal distances.

    Without an explicit geometry it is inferred from the genus, as for TML.

    Raises:
        MeshParseError: Malformed text, non-triangular faces, or an invalid mesh
    """
    lines = _content_lines(text)
    if not lines or not lines[0][0].upper().endswith("OFF"):
        raise MeshParseError("missing OFF header")
    header = lines[0][1:] or (lines.pop(1) if len(lines) > 1 else [])
    try:
        nv, nf = int(header[0]), int(header[1])
        coords = np.array([[float(v) for v in row[:3]] for row in lines[1:1 + nv]])
        face_rows = lines[1 + nv:1 + nv + nf]
    except (IndexError, ValueError) as e:
        raise MeshParseError(f"bad OFF header or vertex block: {e}") from e
    if coords.shape != (nv, 3) or len(face_rows) != nf:
        raise MeshParseError("OFF file is truncated")

    faces = []
    try:
        for row in face_rows:
            if int(row[0]) != 3 or len(row) < 4:
                raise MeshParseError(f"only triangles are supported, got a {row[0]}-gon")
            faces.append([int(v) for v in row[1:4]])
    except (IndexError, ValueError) as e:
        raise MeshParseError(f"bad OFF face row: {e}") from e

    try:
        tri = build_triangulation(np.array(faces, dtype=np.int64), nv)
        lengths = np.linalg.norm(coords[tri.edges[:, 0]] - coords[tri.edges[:, 1]], axis=1)
        geometry = infer_geometry(tri) if geometry is None else Geometry(geometry)
        return MeshMetric(tri, lengths, geometry)
    except MeshError as e:
        raise MeshParseError(f"invalid OFF mesh: {e}") from e


def load_mesh(path: Path | str, geometry: Geometry | None = None) -> MeshMetric:
    """Load a TML or OFF file, chosen by suffix."""
    path = Path(path)
    text = path.read_text()
    logger.info(f"Loading mesh from {path}")
    if path.suffix.lower() == ".off":
        return parse_off(text, geometry)
    return parse_tml(text, geometry)


def save_tml(path: Path | str, m: MeshMetric) -> None:
    """Write canonical TML."""
    Path(path).write_text(format_tml(m))
    logger.info(f"Wrote {m.triangulation!r} to {path}")
