"""
Randomized invariant suites behind ``discrete-uniformization verify``.

Each suite draws seeded instances, checks one family of identities or bounds
and returns a SuiteResult with the worst observed error. Suites are
independent: each gets its own child of the root SeedSequence, so adding or
reordering instances in one suite never changes another.
"""

import itertools
import logging
import math
from typing import Callable

import numpy as np

from discrete_uniformization.core.conformal import (
    curvature,
    curvature_jacobian,
    gauss_bonnet_defect,
    jacobian_from_partials,
    scale_lengths,
)
from discrete_uniformization.core.graph import (
    Graph,
    MeanZeroLaplacianSolver,
    ShiftedLaplacianSolver,
    brute_force_isoperimetric_constant,
    laplacian_apply,
    perimeter_and_area,
    random_connected_graph,
    verify_elliptic_estimate,
)
from discrete_uniformization.core.mesh import MeshMetric, build_triangulation
from discrete_uniformization.core.models import Geometry, SuiteResult
from discrete_uniformization.core.surfaces import equilateral_torus, grid_torus_faces
from discrete_uniformization.core.triangle import (
    TriangleSides,
    angles,
    area,
    area_scaled_heron,
    area_via_cotangent,
    midpoint_triangle_area,
    perturbation_bound_check,
)

logger = logging.getLogger(__name__)

FAULTS = ("jacobian-sign",)


class SuiteSizes:
    """Instance counts for quick (default) and full runs."""

    def __init__(self, full: bool = False):
        self.green = 1000 if full else 200
        self.inverse = 200 if full else 50
        self.triangles = 1000 if full else 200
        self.jacobian = 100 if full else 10
        self.elliptic = 200 if full else 30
        self.elliptic_max_vertices = 18 if full else 10
        self.perturbation = 1000 if full else 200
        self.isoperimetric = 50 if full else 20


def _random_sides(rng: np.random.Generator, low: float, high: float) -> TriangleSides:
    """Random nondegenerate triangle with two sides in [low, high]."""
    a, b = rng.uniform(low, high, size=2)
    lo, hi = abs(a - b), a + b
    c = lo + (hi - lo) * rng.uniform(0.1, 0.9)
    return TriangleSides(float(a), float(b), float(c))


def _suite(name: str, worst: float, tol: float, instances: int, detail: str = "") -> SuiteResult:
    passed = bool(np.isfinite(worst) and worst <= tol)
    return SuiteResult(name=name, passed=passed, instances=instances, worst=float(worst), detail=detail)


# ===== Graph calculus =====

def green_identity_suite(rng: np.random.Generator, count: int) -> SuiteResult:
    """<x, Lap y> = <y, Lap x> = -sum eta dx dy on random weighted graphs."""
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(3, 30))
        g = random_connected_graph(rng, n, extra_edges=int(rng.integers(0, 2 * n)))
        eta = rng.uniform(0.1, 2.0, size=g.edge_count)
        x, y = rng.normal(size=n), rng.normal(size=n)
        dx = x[g.edges[:, 1]] - x[g.edges[:, 0]]
        dy = y[g.edges[:, 1]] - y[g.edges[:, 0]]
        energy = -float(np.sum(eta * dx * dy))
        scale = float(np.sum(eta * np.abs(dx * dy))) or 1.0
        left = float(x @ laplacian_apply(g, eta, y))
        right = float(y @ laplacian_apply(g, eta, x))
        worst = max(worst, abs(left - right) / scale, abs(left - energy) / scale)
    return _suite("green_identity", worst, 1e-12, count)


def laplacian_inverse_suite(rng: np.random.Generator, count: int) -> SuiteResult:
    """Residuals of the mean-zero and shifted inverses."""
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(2, 60))
        g = random_connected_graph(rng, n, extra_edges=int(rng.integers(0, 3 * n)))
        eta = rng.uniform(0.05, 3.0, size=g.edge_count)
        y = rng.normal(size=n)
        y -= y.mean()
        scale = float(np.max(np.abs(y))) or 1.0

        x = MeanZeroLaplacianSolver(g, eta).solve(y)
        worst = max(worst, float(np.max(np.abs(laplacian_apply(g, eta, x) - y))) / scale)
        worst = max(worst, abs(float(x.mean())) / (float(np.max(np.abs(x))) or 1.0))

        D = rng.uniform(0.0, 1.0, size=n)
        D[int(rng.integers(0, n))] += 0.1
        z = ShiftedLaplacianSolver(g, eta, D).solve(y)
        residual = D * z - laplacian_apply(g, eta, z) - y
        worst = max(worst, float(np.max(np.abs(residual))) / scale)
    return _suite("laplacian_inverse", worst, 1e-10, count)


def elliptic_estimate_suite(rng: np.random.Generator, count: int, max_vertices: int) -> SuiteResult:
    """Both forms of the elliptic estimate with C1 from brute force."""
    worst = -math.inf
    failures = 0
    for _ in range(count):
        n = int(rng.integers(3, max_vertices + 1))
        g = random_connected_graph(rng, n, extra_edges=int(rng.integers(0, 2 * n)))
        l = rng.uniform(0.5, 1.5, size=g.edge_count)
        eta = rng.uniform(0.5, 2.0, size=g.edge_count)
        C1 = brute_force_isoperimetric_constant(g, l).constant
        C2, C3, C4 = 1.0, float(eta.min()), 1.0
        x = C2 * l ** 2 * rng.uniform(-1.0, 1.0, size=g.edge_count)
        plain = verify_elliptic_estimate(g, l, eta, x, C1, C2, C3)

        size = float(l.max()) * math.sqrt(float((l ** 2).sum()))
        D = rng.uniform(0.1, 1.0, size=n)
        y = C4 * D * size * rng.uniform(-1.0, 1.0, size=n)
        shifted = verify_elliptic_estimate(g, l, eta, x, C1, C2, C3, y=y, D=D, C4=C4)

        for report in (plain, shifted):
            failures += not report.holds
            worst = max(worst, report.lhs / report.rhs)
    return _suite("elliptic_estimate", worst if failures == 0 else math.inf, 1.0, count,
                  f"max lhs/rhs = {worst:.4g}")


def _enumerated_constant(g: Graph, l: np.ndarray) -> float:
    best = 0.0
    for size in range(1, g.vertex_count):
        for subset in itertools.combinations(range(g.vertex_count), size):
            perimeter, inner, total = perimeter_and_area(g, l, list(subset))
            best = max(best, min(inner, total - inner) / perimeter ** 2)
    return best


def isoperimetric_suite(rng: np.random.Generator, count: int) -> SuiteResult:
    """Brute force against known values, plain enumeration and length scaling."""
    known = [
        (Graph(2, [(0, 1)]), 0.0),
        (Graph(3, [(0, 1), (1, 2), (0, 2)]), 0.25),
        (Graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)]), 0.5),
    ]
    worst = 0.0
    for g, expected in known:
        got = brute_force_isoperimetric_constant(g, np.ones(g.edge_count)).constant
        worst = max(worst, abs(got - expected))
    for _ in range(count):
        n = int(rng.integers(2, 9))
        g = random_connected_graph(rng, n, extra_edges=int(rng.integers(0, n)))
        l = rng.uniform(0.2, 2.0, size=g.edge_count)
        fast = brute_force_isoperimetric_constant(g, l).constant
        scaled = brute_force_isoperimetric_constant(g, 3.0 * l).constant
        slow = _enumerated_constant(g, l)
        worst = max(worst, abs(fast - slow) / max(slow, 1e-300), abs(fast - scaled) / max(fast, 1e-300))
    return _suite("isoperimetric", worst, 1e-12, count + len(known))


# ===== Triangles =====

def triangle_identity_suite(rng: np.random.Generator, count: int) -> SuiteResult:
    """Heron forms against angle-based areas and single-triangle Gauss-Bonnet."""
    worst = 0.0
    for _ in range(count):
        s = _random_sides(rng, 0.05, 1.5)
        A = angles(s, Geometry.EUCLIDEAN)
        sas = 0.5 * s.a * s.b * math.sin(A.C)
        worst = max(worst, abs(area(s, Geometry.EUCLIDEAN) - sas) / sas)

        h = area(s, Geometry.HYPERBOLIC)
        worst = max(worst, abs(h - area_via_cotangent(s, Geometry.HYPERBOLIC)) / h)
        worst = max(worst, abs(h - (math.pi - angles(s, Geometry.HYPERBOLIC).total)) / h)
        worst = max(worst, abs(h - area_scaled_heron(s, -1.0)) / h)

        sph = _random_sides(rng, 0.05, 1.0)
        sa = area(sph, Geometry.SPHERICAL)
        worst = max(worst, abs(sa - area_via_cotangent(sph, Geometry.SPHERICAL)) / sa)
        worst = max(worst, abs(sa - (angles(sph, Geometry.SPHERICAL).total - math.pi)) / sa)
    return _suite("triangle_identities", worst, 1e-10, count)


def area_bounds_suite(rng: np.random.Generator, count: int) -> SuiteResult:
    """Area between eps a^2 / 8 and a^2 / eps, and the midpoint triangle ratio >= 1/5."""
    worst = 0.0
    for _ in range(count):
        s = _random_sides(rng, 0.01, 0.099)
        if max(s) >= 0.1:
            s = s.scaled(0.099 / max(s))
        eps = min(angles(s, Geometry.EUCLIDEAN))
        shortest, longest = min(s), max(s)
        for geometry in Geometry:
            full = area(s, geometry)
            lower = eps / 8.0 * longest ** 2
            upper = shortest ** 2 / eps
            worst = max(worst, lower / full, full / upper)
            ratio = midpoint_triangle_area(s, geometry) / full
            worst = max(worst, 0.2 / ratio)
    return _suite("area_bounds", worst, 1.0, count, f"max bound ratio = {worst:.4g}")


def _admissible_pair(
    rng: np.random.Generator, geometry: Geometry, eps: float
) -> tuple[TriangleSides, TriangleSides]:
    while True:
        high = 0.1 if geometry == Geometry.HYPERBOLIC else 2.0
        s = _random_sides(rng, 0.2 * high, high)
        if max(s) > high:
            s = s.scaled(high / max(s))
        if min(angles(s, geometry)) >= eps:
            break
    threshold = eps ** 2 / 48.0 if geometry == Geometry.EUCLIDEAN else eps ** 3 / 60.0
    delta = threshold * rng.uniform(0.0, 0.99)
    noise = rng.uniform(-1.0, 1.0, size=3)
    return s, TriangleSides(*(float(v) for v in s.as_array() * (1.0 + delta * noise)))


def perturbation_suite(rng: np.random.Generator, count: int) -> SuiteResult:
    """Angle and area deviations under admissible side perturbations, E and H."""
    worst = 0.0
    for geometry in (Geometry.EUCLIDEAN, Geometry.HYPERBOLIC):
        for _ in range(count):
            eps = float(rng.uniform(0.1, 0.5))
            base, perturbed = _admissible_pair(rng, geometry, eps)
            report = perturbation_bound_check(base, perturbed, eps, geometry)
            if report.delta == 0.0:
                continue
            worst = max(
                worst,
                report.angle_dev / report.angle_bound,
                report.area_dev / report.area_bound,
            )
    return _suite("perturbation_bounds", worst, 1.0, 2 * count, f"max dev/bound = {worst:.4g}")


# ===== Curvature Jacobian =====

def _jacobian_instance(rng: np.random.Generator, geometry: Geometry) -> tuple[MeshMetric, np.ndarray]:
    tri = build_triangulation(grid_torus_faces(4))
    base = 1.0 if geometry == Geometry.EUCLIDEAN else 0.3
    lengths = base * (1.0 + 0.05 * rng.uniform(-1.0, 1.0, size=tri.edge_count))
    u = 0.05 * rng.uniform(-1.0, 1.0, size=tri.vertex_count)
    return MeshMetric(tri, lengths, geometry), u


def finite_difference_jacobian(m: MeshMetric, u: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central-difference dK/du, one column per vertex."""
    n = len(u)
    J = np.empty((n, n))
    for j in range(n):
        step = np.zeros(n)
        step[j] = h
        J[:, j] = (curvature(m, u + step) - curvature(m, u - step)) / (2.0 * h)
    return J


def jacobian_suite(rng: np.random.Generator, count: int, fault: str | None = None) -> SuiteResult:
    """Closed-form Jacobian against finite differences, symmetry, row sums and partial assembly."""
    worst_fd = worst_sym = worst_rows = worst_partials = 0.0
    for geometry in (Geometry.EUCLIDEAN, Geometry.HYPERBOLIC):
        for _ in range(count):
            m, u = _jacobian_instance(rng, geometry)
            J = curvature_jacobian(m, u).dense()
            if fault == "jacobian-sign":
                J = -J
            scale = float(np.max(np.abs(J)))
            worst_fd = max(worst_fd, float(np.max(np.abs(finite_difference_jacobian(m, u) - J))) / scale)
            worst_sym = max(worst_sym, float(np.max(np.abs(J - J.T))) / scale)
            P = jacobian_from_partials(m, u).toarray()
            worst_partials = max(worst_partials, float(np.max(np.abs(P - J))) / scale)
            if geometry == Geometry.EUCLIDEAN:
                worst_rows = max(worst_rows, float(np.max(np.abs(J.sum(axis=1)))) / scale)

    passed = worst_fd <= 1e-6 and worst_sym <= 1e-12 and worst_rows <= 1e-12 and worst_partials <= 1e-10
    detail = (
        f"fd {worst_fd:.3e}, symmetry {worst_sym:.3e}, "
        f"row sums {worst_rows:.3e}, partials {worst_partials:.3e}"
    )
    return SuiteResult(
        name="curvature_jacobian",
        passed=bool(passed),
        instances=2 * count,
        worst=max(worst_fd, worst_sym, worst_rows, worst_partials),
        detail=detail,
    )


def gauss_bonnet_suite(rng: np.random.Generator, count: int) -> SuiteResult:
    """sum K = 2 pi chi (E) and 2 pi chi + area (H) on perturbed meshes."""
    worst = 0.0
    flat = equilateral_torus(6)
    worst = max(worst, abs(gauss_bonnet_defect(flat)))
    for _ in range(count):
        for geometry in (Geometry.EUCLIDEAN, Geometry.HYPERBOLIC):
            m, u = _jacobian_instance(rng, geometry)
            worst = max(worst, abs(gauss_bonnet_defect(scale_lengths(m, u))))
    return _suite("gauss_bonnet", worst, 1e-9, 2 * count + 1)


# ===== Runner =====

def run_suites(seed: int, full: bool = False, fault: str | None = None) -> list[SuiteResult]:
    """
    Run every suite; deterministic given ``seed``.

    Args:
        seed: Root seed
        full: Use the full instance counts
        fault: Deliberate defect to inject (``jacobian-sign``) to check the suites catch it
    """
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}")
    sizes = SuiteSizes(full)
    suites: list[tuple[str, Callable[[np.random.Generator], SuiteResult]]] = [
        ("green_identity", lambda r: green_identity_suite(r, sizes.green)),
        ("laplacian_inverse", lambda r: laplacian_inverse_suite(r, sizes.inverse)),
        ("elliptic_estimate", lambda r: elliptic_estimate_suite(r, sizes.elliptic, sizes.elliptic_max_vertices)),
        ("isoperimetric", lambda r: isoperimetric_suite(r, sizes.isoperimetric)),
        ("triangle_identities", lambda r: triangle_identity_suite(r, sizes.triangles)),
        ("area_bounds", lambda r: area_bounds_suite(r, sizes.triangles)),
        ("perturbation_bounds", lambda r: perturbation_suite(r, sizes.perturbation)),
        ("curvature_jacobian", lambda r: jacobian_suite(r, sizes.jacobian, fault)),
        ("gauss_bonnet", lambda r: gauss_bonnet_suite(r, sizes.jacobian)),
    ]
    children = np.random.SeedSequence(seed).spawn(len(suites))
    results = []
    for (name, run), child in zip(suites, children):
        result = run(np.random.default_rng(child))
        level = logging.INFO if result.passed else logging.WARNING
        logger.log(level, f"Suite {name}: {'pass' if result.passed else 'FAIL'} (worst {result.worst:.3e})")
        results.append(result)
    return results
