"""
Discrete vector calculus on weighted graphs.

Edges are stored once as ``(i, j)`` with ``i < j``. A flow value ``x[e]`` is
``x_ij`` on that canonical direction, so ``x_ji = -x[e]`` by construction.
The Laplacian is ``(Lap x)_i = sum_j eta_ij (x_j - x_i)``; it is negative
semidefinite, and ``D - Lap`` is positive definite for ``D >= 0, D != 0``.
"""

import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import splu

from discrete_uniformization.core.constants import (
    MAX_BRUTE_FORCE_VERTICES,
    MEAN_ZERO_TOL,
    RESIDUAL_TOL,
    SUBSET_BATCH,
)
from discrete_uniformization.core.errors import (
    HypothesisViolated,
    InvalidGraph,
    NotMeanZero,
    SingularSystem,
    TooLarge,
)
from discrete_uniformization.core.models import EllipticEstimateReport, IsoperimetricResult

logger = logging.getLogger(__name__)


class Graph:
    """Undirected, simple, connected graph with canonical edge order."""

    def __init__(self, vertex_count: int, edges: np.ndarray | list[tuple[int, int]]):
        E = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if vertex_count < 1:
            raise InvalidGraph("graph needs at least one vertex")
        if E.size and (E.min() < 0 or E.max() >= vertex_count):
            raise InvalidGraph(f"edge endpoints must lie in [0, {vertex_count})")
        if np.any(E[:, 0] == E[:, 1]):
            raise InvalidGraph("graph has a self-loop")

        E = np.sort(E, axis=1)
        keys = E[:, 0] * vertex_count + E[:, 1]
        order = np.argsort(keys, kind="stable")
        if np.any(np.diff(keys[order]) == 0):
            raise InvalidGraph("graph has parallel edges")

        self.vertex_count = int(vertex_count)
        self.edges = E[order]
        self.edges.setflags(write=False)

        n_components, _ = connected_components(self.adjacency(), directed=False)
        if n_components != 1:
            raise InvalidGraph(f"graph has {n_components} connected components")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency matrix."""
        n = self.vertex_count
        i, j = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * len(i))
        return sp.csr_matrix((data, (np.r_[i, j], np.r_[j, i])), shape=(n, n))

    def incidence(self) -> sp.csr_matrix:
        """``E x V`` matrix with -1 at the tail and +1 at the head of each edge."""
        m = self.edge_count
        rows = np.repeat(np.arange(m), 2)
        cols = self.edges.ravel()
        data = np.tile([-1.0, 1.0], m)
        return sp.csr_matrix((data, (rows, cols)), shape=(m, self.vertex_count))

    def edge_index(self, i: int, j: int) -> int:
        """Index of edge {i, j}."""
        lo, hi = min(i, j), max(i, j)
        keys = self.edges[:, 0] * self.vertex_count + self.edges[:, 1]
        pos = int(np.searchsorted(keys, lo * self.vertex_count + hi))
        if pos >= len(keys) or keys[pos] != lo * self.vertex_count + hi:
            raise KeyError(f"no edge between {i} and {j}")
        return pos


def random_connected_graph(
    rng: np.random.Generator, vertex_count: int, extra_edges: int = 0
) -> Graph:
    """Random spanning tree plus up to ``extra_edges`` additional edges."""
    edges = {tuple(sorted((int(rng.integers(0, v)), v))) for v in range(1, vertex_count)}
    attempts = 0
    target = len(edges) + extra_edges
    max_edges = vertex_count * (vertex_count - 1) // 2
    while len(edges) < min(target, max_edges) and attempts < 50 * (extra_edges + 1):
        i, j = rng.choice(vertex_count, size=2, replace=False)
        edges.add((int(min(i, j)), int(max(i, j))))
        attempts += 1
    return Graph(vertex_count, sorted(edges))


# ===== Differential operators =====

def gradient(g: Graph, eta: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Flow ``eta_ij (x_j - x_i)`` on each canonical edge."""
    i, j = g.edges[:, 0], g.edges[:, 1]
    return np.asarray(eta, dtype=float) * (x[j] - x[i])


def divergence(g: Graph, flow: np.ndarray) -> np.ndarray:
    """``div(x)_i = sum_j x_ij``."""
    flow = np.asarray(flow, dtype=float)
    out = np.zeros(g.vertex_count)
    np.add.at(out, g.edges[:, 0], flow)
    np.add.at(out, g.edges[:, 1], -flow)
    return out


def laplacian_apply(g: Graph, eta: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``(Lap x)_i = sum_j eta_ij (x_j - x_i)``."""
    return divergence(g, gradient(g, eta, np.asarray(x, dtype=float)))


def laplacian_matrix(g: Graph, eta: np.ndarray) -> sp.csr_matrix:
    """Symmetric sparse Laplacian matrix (negative semidefinite)."""
    B = g.incidence()
    return (-(B.T @ sp.diags(np.asarray(eta, dtype=float)) @ B)).tocsr()


def _check_residual(residual: float, scale: float, what: str) -> None:
    if not np.isfinite(residual) or residual > RESIDUAL_TOL * max(scale, np.finfo(float).tiny):
        raise SingularSystem(f"{what}: relative residual {residual / max(scale, 1e-300):.3e}")


class MeanZeroLaplacianSolver:
    """Factorization of the Laplacian restricted to mean-zero fields."""

    def __init__(self, g: Graph, eta: np.ndarray):
        eta = np.asarray(eta, dtype=float)
        if np.any(~np.isfinite(eta)) or np.any(eta <= 0):
            bad = int(np.argmin(np.where(np.isfinite(eta), eta, -np.inf)))
            raise SingularSystem(f"edge weight {eta[bad]!r} on edge {bad} is not positive")
        self.graph = g
        self.eta = eta
        self.matrix = laplacian_matrix(g, eta)
        # pin vertex 0 and solve (-Lap) x = -y on the rest
        self._lu = None
        if g.vertex_count > 1:
            reduced = (-self.matrix)[1:, 1:].tocsc()
            try:
                self._lu = splu(reduced)
            except RuntimeError as e:
                raise SingularSystem(f"Laplacian factorization failed: {e}") from e

    def solve(self, y: np.ndarray) -> np.ndarray:
        """Mean-zero x with ``Lap x = y`` (``y`` projected onto the mean-zero subspace)."""
        y = np.asarray(y, dtype=float)
        y = y - y.mean()
        x = np.zeros(self.graph.vertex_count)
        scale = float(np.max(np.abs(y))) if y.size else 0.0
        if self._lu is None or scale == 0.0:
            return x
        x[1:] = self._lu.solve(-y[1:])
        x -= x.mean()
        residual = float(np.max(np.abs(self.matrix @ x - y)))
        _check_residual(residual, scale, "mean-zero Laplacian solve")
        return x


class ShiftedLaplacianSolver:
    """Factorization of ``D - Lap`` for a nonnegative, nonzero diagonal ``D``."""

    def __init__(self, g: Graph, eta: np.ndarray, D: np.ndarray):
        eta = np.asarray(eta, dtype=float)
        D = np.asarray(D, dtype=float)
        if np.any(~np.isfinite(eta)) or np.any(eta <= 0):
            raise SingularSystem("edge weights must be positive")
        if np.any(~np.isfinite(D)) or np.any(D < 0) or not np.any(D > 0):
            raise SingularSystem("diagonal must be nonnegative with a positive entry")
        self.graph = g
        self.matrix = (sp.diags(D) - laplacian_matrix(g, eta)).tocsc()
        try:
            self._lu = splu(self.matrix)
        except RuntimeError as e:
            raise SingularSystem(f"shifted Laplacian factorization failed: {e}") from e

    def solve(self, y: np.ndarray) -> np.ndarray:
        """x with ``(D - Lap) x = y``."""
        y = np.asarray(y, dtype=float)
        scale = float(np.max(np.abs(y))) if y.size else 0.0
        if scale == 0.0:
            return np.zeros_like(y)
        x = self._lu.solve(y)
        residual = float(np.max(np.abs(self.matrix @ x - y)))
        _check_residual(residual, scale, "shifted Laplacian solve")
        return x


def solve_laplacian_mean_zero(g: Graph, eta: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    Inverse of the Laplacian on the mean-zero subspace.

    Raises:
        NotMeanZero: ``|sum(y)|`` exceeds ``1e-10 |y|inf``
        SingularSystem: A weight is not positive, or the residual is too large
    """
    y = np.asarray(y, dtype=float)
    scale = float(np.max(np.abs(y))) if y.size else 0.0
    if abs(float(y.sum())) > MEAN_ZERO_TOL * scale:
        raise NotMeanZero(f"sum(y) = {y.sum():.3e} with |y|inf = {scale:.3e}")
    return MeanZeroLaplacianSolver(g, eta).solve(y)


def solve_shifted(g: Graph, eta: np.ndarray, D: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Solve ``(D - Lap) x = y``."""
    return ShiftedLaplacianSolver(g, eta, D).solve(y)


# ===== Isoperimetry =====

def _subset_mask(g: Graph, subset) -> np.ndarray:
    subset = np.asarray(subset)
    if subset.dtype == bool and subset.shape == (g.vertex_count,):
        return subset
    mask = np.zeros(g.vertex_count, dtype=bool)
    mask[subset.astype(np.int64)] = True
    return mask


def perimeter_and_area(g: Graph, l: np.ndarray, subset) -> tuple[float, float, float]:
    """
    l-perimeter of a vertex subset, its l-area, and the total l-area.

    Args:
        g: Graph
        l: Positive edge lengths
        subset: Vertex indices or a boolean mask

    Returns:
        (sum of l over boundary edges, sum of l^2 over inner edges, sum of l^2)
    """
    l = np.asarray(l, dtype=float)
    mask = _subset_mask(g, subset)
    mi, mj = mask[g.edges[:, 0]], mask[g.edges[:, 1]]
    perimeter = float(l[mi != mj].sum())
    area = float((l[mi & mj] ** 2).sum())
    return perimeter, area, float((l ** 2).sum())


def brute_force_isoperimetric_constant(g: Graph, l: np.ndarray) -> IsoperimetricResult:
    """
    Smallest C with ``min(|V0|, |V| - |V0|) <= C |dV0|^2`` over all nonempty
    proper subsets, by enumeration.

    Raises:
        TooLarge: More than 22 vertices
    """
    n = g.vertex_count
    if n > MAX_BRUTE_FORCE_VERTICES:
        raise TooLarge(f"{n} vertices exceeds the enumeration cap of {MAX_BRUTE_FORCE_VERTICES}")
    if n < 2:
        return IsoperimetricResult(constant=0.0, subset=[])

    l = np.asarray(l, dtype=float)
    l2 = l ** 2
    total = float(l2.sum())
    ei, ej = g.edges[:, 0], g.edges[:, 1]
    shifts = np.arange(n, dtype=np.int64)

    best, best_mask = -1.0, 1
    last = (1 << n) - 1
    for start in range(1, last, SUBSET_BATCH):
        masks = np.arange(start, min(start + SUBSET_BATCH, last), dtype=np.int64)
        bits = ((masks[:, None] >> shifts) & 1).astype(bool)
        bi, bj = bits[:, ei], bits[:, ej]
        perimeter = (bi ^ bj) @ l
        area = (bi & bj) @ l2
        smaller = np.minimum(area, total - area)
        ratio = smaller / perimeter ** 2
        k = int(np.argmax(ratio))
        if ratio[k] > best:
            best, best_mask = float(ratio[k]), int(masks[k])

    subset = [v for v in range(n) if best_mask >> v & 1]
    logger.debug(f"Isoperimetric constant {best:.6g} over {last - 1} subsets of {n} vertices")
    return IsoperimetricResult(constant=best, subset=subset)


# ===== Elliptic estimate =====

def verify_elliptic_estimate(
    g: Graph,
    l: np.ndarray,
    eta: np.ndarray,
    x: np.ndarray,
    C1: float,
    C2: float,
    C3: float,
    *,
    y: np.ndarray | None = None,
    D: np.ndarray | None = None,
    C4: float | None = None,
) -> EllipticEstimateReport:
    """
    Evaluate both sides of the discrete elliptic estimate.

    Plain form: ``|Lap^-1 div x|inf <= 4 C2 sqrt(C1 + 1) / C3 * |l|inf * |V|^1/2``.
    Shifted form (when ``D`` is given): ``|(D - Lap)^-1 (div x + y)|inf <=
    (C4 + 8 C2 sqrt(C1 + 1) / C3) * |l|inf * |V|^1/2``, where ``|V| = sum l^2``.

    Raises:
        ValueError: ``y`` is given without ``D``
        HypothesisViolated: A flow, weight, isoperimetry or source bound fails
    """
    if y is not None and D is None:
        raise ValueError("a source term y needs the shift D")
    l = np.asarray(l, dtype=float)
    eta = np.asarray(eta, dtype=float)
    x = np.asarray(x, dtype=float)

    if np.any(np.abs(x) > C2 * l ** 2 * (1.0 + 1e-12)):
        raise HypothesisViolated("flow_bound", "|x_ij| exceeds C2 l_ij^2")
    if C3 <= 0 or np.any(eta < C3):
        raise HypothesisViolated("weight_bound", f"edge weights fall below C3 = {C3}")
    if g.vertex_count <= MAX_BRUTE_FORCE_VERTICES:
        iso = brute_force_isoperimetric_constant(g, l).constant
        if iso > C1 * (1.0 + 1e-12):
            raise HypothesisViolated(
                "isoperimetric", f"graph is {iso:.6g}-isoperimetric, not {C1}-isoperimetric"
            )

    size = float(l.max()) * float(np.sqrt((l ** 2).sum()))
    spread = C2 * np.sqrt(C1 + 1.0) / C3
    source = divergence(g, x)

    if D is None:
        lhs = float(np.max(np.abs(MeanZeroLaplacianSolver(g, eta).solve(source))))
        rhs = 4.0 * spread * size
        return EllipticEstimateReport(lhs=lhs, rhs=rhs, holds=lhs <= rhs)

    D = np.asarray(D, dtype=float)
    y = np.zeros(g.vertex_count) if y is None else np.asarray(y, dtype=float)
    C4 = 0.0 if C4 is None else C4
    if np.any(np.abs(y) > C4 * D * size * (1.0 + 1e-12)):
        raise HypothesisViolated("source_bound", "|y_i| exceeds C4 D_ii |l|inf |V|^1/2")
    lhs = float(np.max(np.abs(ShiftedLaplacianSolver(g, eta, D).solve(source + y))))
    rhs = (C4 + 8.0 * spread) * size
    return EllipticEstimateReport(lhs=lhs, rhs=rhs, holds=lhs <= rhs, shifted=True)
