"""Exception hierarchy for discrete uniformization."""


class UniformizationError(Exception):
    """Base class for all errors raised by this package."""
    pass


# ===== Mesh errors =====

class MeshError(UniformizationError):
    """Raised when a triangulation or metric is invalid."""
    pass


class NonSimplicial(MeshError):
    """Raised when a face repeats a vertex or an index is out of range."""
    pass


class NonManifoldEdge(MeshError):
    """Raised when an edge is not incident to exactly two faces."""

    def __init__(self, edge: tuple[int, int], face_count: int):
        self.edge = edge
        self.face_count = face_count
        super().__init__(f"edge {edge} is incident to {face_count} faces (expected 2)")


class NonManifoldVertex(MeshError):
    """Raised when the faces around a vertex do not form a single disk."""

    def __init__(self, vertex: int):
        self.vertex = vertex
        super().__init__(f"vertex {vertex} has a disconnected link")


class DuplicateFace(MeshError):
    """Raised when the same vertex triple is listed twice."""

    def __init__(self, face: tuple[int, int, int]):
        self.face = face
        super().__init__(f"face {face} is listed more than once")


class NonOrientable(MeshError):
    """Raised when no consistent orientation of the faces exists."""
    pass


class Disconnected(MeshError):
    """Raised when the edge graph has more than one component."""

    def __init__(self, components: int):
        self.components = components
        super().__init__(f"mesh has {components} connected components")


class TriangleInequalityViolated(MeshError):
    """Raised when a face's lengths do not form a nondegenerate triangle."""

    def __init__(self, face: int, lengths: tuple[float, float, float] | None = None):
        self.face = face
        self.lengths = lengths
        detail = f" with lengths {lengths}" if lengths is not None else ""
        super().__init__(f"triangle inequality violated on face {face}{detail}")


class MeshParseError(MeshError):
    """Raised when a mesh file cannot be parsed."""
    pass


# ===== Triangle kernel errors =====

class DegenerateTriangle(UniformizationError):
    """Raised when side lengths do not form a nondegenerate triangle."""
    pass


class PreconditionViolated(UniformizationError):
    """Raised when a perturbation bound is asked for outside its hypotheses."""

    def __init__(self, hypothesis: str, message: str):
        self.hypothesis = hypothesis
        super().__init__(f"{hypothesis}: {message}")


# ===== Graph errors =====

class GraphError(UniformizationError):
    """Raised for invalid graph calculus input."""
    pass


class InvalidGraph(GraphError):
    """Raised when a graph is not simple or not connected."""
    pass


class NotMeanZero(GraphError):
    """Raised when a right-hand side is not in the mean-zero subspace."""
    pass


class SingularSystem(GraphError):
    """Raised when a linear solve fails or its residual is too large."""
    pass


class TooLarge(GraphError):
    """Raised when brute-force enumeration would exceed the vertex cap."""
    pass


class HypothesisViolated(GraphError):
    """Raised when an elliptic estimate hypothesis does not hold."""

    def __init__(self, hypothesis: str, message: str):
        self.hypothesis = hypothesis
        super().__init__(f"{hypothesis}: {message}")


# ===== Solver errors =====

class SolverError(UniformizationError):
    """Raised when a uniformization solve cannot complete."""
    pass


class WrongGenus(SolverError):
    """Raised when the mesh genus does not match the requested geometry."""

    def __init__(self, genus: int, expected: str):
        self.genus = genus
        super().__init__(f"WrongGenus: genus {genus}, expected {expected}")


class GeometryMismatch(SolverError):
    """Raised when a metric has the wrong geometry tag for a solver."""
    pass


class SolverDiverged(SolverError):
    """Raised when Newton iterations stop reducing the curvature residual."""

    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"SolverDiverged: {message} (|K|inf = {residual:.3e})")


class RegularityLost(SolverError):
    """Raised when every admissible step falls below the regularity floor."""

    def __init__(self, message: str, min_angle: float, max_opposite_sum: float):
        self.min_angle = min_angle
        self.max_opposite_sum = max_opposite_sum
        super().__init__(
            f"RegularityLost: {message} (min angle {min_angle:.3e}, "
            f"max opposite sum {max_opposite_sum:.6f})"
        )


# ===== Surface errors =====

class SurfaceError(UniformizationError):
    """Raised when a test surface cannot be sampled."""
    pass


class GeodesicSolverFailed(SurfaceError):
    """Raised when polyline relaxation does not converge."""
    pass


class SubdivisionTooCoarse(SurfaceError):
    """Raised when a subdivided genus-2 mesh is too coarse or irregular."""
    pass
