"""
Single-triangle kernel for Euclidean, hyperbolic and spherical geometry.

Every function accepts side lengths and returns angles, areas or
derivatives. Array kernels (``corner_angles``, ``face_areas``,
``conformal_partials_array``) take an ``(F, 3)`` array whose column ``i`` is
the side opposite corner ``i`` and are what the mesh code calls; the scalar
API below wraps them for single triangles.

Angles use half-angle formulas through ``atan2`` so that accuracy holds up
near degenerate configurations. No formula here subtracts ``cosh`` values.
"""

import math
from typing import NamedTuple

import numpy as np

from discrete_uniformization.core.constants import TRIANGLE_SLACK
from discrete_uniformization.core.errors import DegenerateTriangle, PreconditionViolated
from discrete_uniformization.core.models import Geometry, PerturbationReport


class TriangleSides(NamedTuple):
    """Side lengths; ``a`` is opposite corner A, and so on."""
    a: float
    b: float
    c: float

    @property
    def semiperimeter(self) -> float:
        return 0.5 * (self.a + self.b + self.c)

    def scaled(self, t: float) -> "TriangleSides":
        return TriangleSides(t * self.a, t * self.b, t * self.c)

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c], dtype=float)


class TriangleAngles(NamedTuple):
    """Inner angles in radians; ``A`` is opposite side ``a``."""
    A: float
    B: float
    C: float

    @property
    def total(self) -> float:
        return self.A + self.B + self.C

    def tilde(self) -> "TriangleAngles":
        """The combinations (pi + A - B - C) / 2 and cyclic."""
        A, B, C = self
        return TriangleAngles(
            0.5 * (math.pi + A - B - C),
            0.5 * (math.pi + B - C - A),
            0.5 * (math.pi + C - A - B),
        )

    def as_array(self) -> np.ndarray:
        return np.array([self.A, self.B, self.C], dtype=float)


# ===== Validation =====

def degenerate_mask(L: np.ndarray, geometry: Geometry = Geometry.EUCLIDEAN) -> np.ndarray:
    """Boolean mask of rows of ``L`` that are not strict nondegenerate triangles."""
    L = np.atleast_2d(np.asarray(L, dtype=float))
    a, b, c = L[:, 0], L[:, 1], L[:, 2]
    slack = TRIANGLE_SLACK * L.max(axis=1)
    bad = ~np.all(np.isfinite(L), axis=1) | np.any(L <= 0, axis=1)
    bad |= (b + c - a < slack) | (c + a - b < slack) | (a + b - c < slack)
    if geometry == Geometry.SPHERICAL:
        bad |= np.any(L >= math.pi, axis=1) | (a + b + c >= 2 * math.pi)
    return bad


def _validated(sides: TriangleSides | np.ndarray, geometry: Geometry) -> np.ndarray:
    L = np.asarray(sides, dtype=float).reshape(1, 3)
    if degenerate_mask(L, geometry)[0]:
        raise DegenerateTriangle(f"sides {tuple(L[0])} do not form a {geometry.name.lower()} triangle")
    return L


def _half_differences(L: np.ndarray) -> tuple[np.ndarray, ...]:
    """Semiperimeter s and s - a, s - b, s - c without cancellation."""
    a, b, c = L[..., 0], L[..., 1], L[..., 2]
    s = 0.5 * (a + b + c)
    return s, 0.5 * (b + c - a), 0.5 * (c + a - b), 0.5 * (a + b - c)


# ===== Array kernels =====

def corner_angles(L: np.ndarray, geometry: Geometry) -> np.ndarray:
    """
    Inner angles for a batch of triangles.

    Args:
        L: ``(F, 3)`` side lengths, column i opposite corner i (assumed valid)
        geometry: Background geometry

    Returns:
        ``(F, 3)`` angles
    """
    L = np.asarray(L, dtype=float)
    s, sa, sb, sc = _half_differences(L)
    if geometry == Geometry.EUCLIDEAN:
        f = lambda x: x  # noqa: E731
    elif geometry == Geometry.HYPERBOLIC:
        f = np.sinh
    else:
        f = np.sin
    fs, fa, fb, fc = f(s), f(sa), f(sb), f(sc)
    A = 2.0 * np.arctan2(np.sqrt(fb * fc), np.sqrt(fs * fa))
    B = 2.0 * np.arctan2(np.sqrt(fc * fa), np.sqrt(fs * fb))
    C = 2.0 * np.arctan2(np.sqrt(fa * fb), np.sqrt(fs * fc))
    return np.stack([A, B, C], axis=-1)


def face_areas(L: np.ndarray, geometry: Geometry) -> np.ndarray:
    """Areas for a batch of triangles via the Heron-type formula of each geometry."""
    L = np.asarray(L, dtype=float)
    if geometry == Geometry.EUCLIDEAN:
        # Kahan's ordering: x >= y >= z
        srt = -np.sort(-L, axis=-1)
        x, y, z = srt[..., 0], srt[..., 1], srt[..., 2]
        prod = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z))
        return 0.25 * np.sqrt(np.maximum(prod, 0.0))

    s, sa, sb, sc = _half_differences(L)
    f = np.tanh if geometry == Geometry.HYPERBOLIC else np.tan
    # tan^2(area / 4) = f(s/2) f((s-a)/2) f((s-b)/2) f((s-c)/2)
    prod = f(0.5 * s) * f(0.5 * sa) * f(0.5 * sb) * f(0.5 * sc)
    return 4.0 * np.arctan(np.sqrt(np.maximum(prod, 0.0)))


def sas_area(x: np.ndarray, y: np.ndarray, C: np.ndarray, geometry: Geometry) -> np.ndarray:
    """Area of the triangle with sides ``x``, ``y`` and included angle ``C``."""
    x, y, C = np.asarray(x, float), np.asarray(y, float), np.asarray(C, float)
    if geometry == Geometry.EUCLIDEAN:
        return 0.5 * x * y * np.sin(C)
    if geometry == Geometry.HYPERBOLIC:
        # cot(area / 2) = (coth(x/2) coth(y/2) - cos C) / sin C
        denom = 1.0 / (np.tanh(0.5 * x) * np.tanh(0.5 * y)) - np.cos(C)
    else:
        # cot(area / 2) = (cot(x/2) cot(y/2) + cos C) / sin C
        denom = 1.0 / (np.tan(0.5 * x) * np.tan(0.5 * y)) + np.cos(C)
    return 2.0 * np.arctan2(np.sin(C), denom)


def conformal_partials_array(L: np.ndarray, geometry: Geometry) -> np.ndarray:
    """
    ``(F, 3, 3)`` array P with ``P[f, i, j]`` = d(angle i) / d(u at corner j).

    Euclidean: off-diagonal ``0.5 cot(angle k)``. Hyperbolic: off-diagonal
    ``0.5 cot(tilde k) (1 - tanh^2(side k / 2))`` where side k joins corners
    i and j. Diagonals follow from the two sides meeting at corner i.
    """
    L = np.asarray(L, dtype=float)
    theta = corner_angles(L, geometry)
    n = L.shape[0]
    P = np.zeros((n, 3, 3))
    if geometry == Geometry.EUCLIDEAN:
        half_cot = 0.5 / np.tan(theta)
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            P[:, i, j] = half_cot[:, k]
            P[:, i, k] = half_cot[:, j]
            P[:, i, i] = -(half_cot[:, j] + half_cot[:, k])
        return P
    if geometry != Geometry.HYPERBOLIC:
        raise ValueError(f"conformal partials are defined for E and H, not {geometry.value}")

    total = theta.sum(axis=1, keepdims=True)
    tilde = 0.5 * (np.pi + 2.0 * theta - total)
    half_cot = 0.5 / np.tan(tilde)
    t = np.tanh(0.5 * L) ** 2
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        P[:, i, j] = half_cot[:, k] * (1.0 - t[:, k])
        P[:, i, k] = half_cot[:, j] * (1.0 - t[:, j])
        P[:, i, i] = -half_cot[:, k] * (1.0 + t[:, k]) - half_cot[:, j] * (1.0 + t[:, j])
    return P


# ===== Scalar API =====

def angles(sides: TriangleSides, geometry: Geometry) -> TriangleAngles:
    """Inner angles of a single triangle."""
    L = _validated(sides, geometry)
    return TriangleAngles(*(float(v) for v in corner_angles(L, geometry)[0]))


def area(sides: TriangleSides, geometry: Geometry) -> float:
    """Area from side lengths (Heron, hyperbolic tanh form, or L'Huilier)."""
    L = _validated(sides, geometry)
    return float(face_areas(L, geometry)[0])


def area_via_cotangent(sides: TriangleSides, geometry: Geometry) -> float:
    """Area from sides a, b and their included angle C (hyperbolic or spherical)."""
    if geometry == Geometry.EUCLIDEAN:
        raise ValueError("area_via_cotangent is defined for hyperbolic and spherical triangles")
    L = _validated(sides, geometry)
    C = corner_angles(L, geometry)[0, 2]
    return float(sas_area(L[0, 0], L[0, 1], C, geometry))


def area_scaled_heron(sides: TriangleSides, curvature: float) -> float:
    """Area of a triangle in constant curvature ``curvature``, by rescaling to +-1."""
    if curvature == 0:
        return area(sides, Geometry.EUCLIDEAN)
    k = abs(curvature)
    geometry = Geometry.HYPERBOLIC if curvature < 0 else Geometry.SPHERICAL
    return area(sides.scaled(math.sqrt(k)), geometry) / k


def midpoint_third_side(sides: TriangleSides, geometry: Geometry) -> float:
    """
    Distance between the midpoints of sides a and b.

    Law of cosines in the form
    ``f(m/2)^2 = f((x - y)/2)^2 + F(x) F(y) sin^2(C/2)`` with ``x = a/2``,
    ``y = b/2`` (``f = sinh``, ``F = sinh`` for H; ``sin`` for S; identity for E).
    """
    L = _validated(sides, geometry)
    C = corner_angles(L, geometry)[0, 2]
    x, y = 0.5 * L[0, 0], 0.5 * L[0, 1]
    s2 = math.sin(0.5 * C) ** 2
    if geometry == Geometry.EUCLIDEAN:
        return 2.0 * math.sqrt((0.5 * (x - y)) ** 2 + x * y * s2)
    if geometry == Geometry.HYPERBOLIC:
        v = math.sinh(0.5 * (x - y)) ** 2 + math.sinh(x) * math.sinh(y) * s2
        return 2.0 * math.asinh(math.sqrt(v))
    v = math.sin(0.5 * (x - y)) ** 2 + math.sin(x) * math.sin(y) * s2
    return 2.0 * math.asin(math.sqrt(v))


def midpoint_triangle_area(sides: TriangleSides, geometry: Geometry) -> float:
    """
    Area of the triangle cut off at corner C by the midpoints of sides a and b.

    Its sides are a/2, b/2 and the midline, measured with the Heron-type
    formula of the geometry. Meant for the small-triangle regime (sides
    below 0.1), where the ratio to the full area stays at least 1/5.
    """
    L = _validated(sides, geometry)
    corner = np.array([[0.5 * L[0, 0], 0.5 * L[0, 1], midpoint_third_side(sides, geometry)]])
    return float(face_areas(corner, geometry)[0])


def angle_derivatives(sides: TriangleSides, geometry: Geometry) -> np.ndarray:
    """
    Jacobian ``M[i, j]`` = d(angle i) / d(side j).

    Diagonal ``1 / (f(s_j) sin(angle k))``, off-diagonal
    ``-cot(angle k) / f(s_j)``, with ``f`` the identity (E) or ``sinh`` (H).
    """
    if geometry not in (Geometry.EUCLIDEAN, Geometry.HYPERBOLIC):
        raise ValueError("angle derivatives are defined for E and H")
    L = _validated(sides, geometry)[0]
    theta = corner_angles(L[None, :], geometry)[0]
    f = L if geometry == Geometry.EUCLIDEAN else np.sinh(L)
    M = np.empty((3, 3))
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        M[i, i] = 1.0 / (f[j] * math.sin(theta[k]))
        M[i, j] = -1.0 / (math.tan(theta[k]) * f[j])
        M[i, k] = -1.0 / (math.tan(theta[j]) * f[k])
    return M


def conformal_angle_partials(sides: TriangleSides, geometry: Geometry) -> np.ndarray:
    """3x3 matrix d(A, B, C) / d(u_A, u_B, u_C) at the given (current) sides."""
    L = _validated(sides, geometry)
    return conformal_partials_array(L, geometry)[0]


def scale_sides(sides: TriangleSides, u: np.ndarray, geometry: Geometry) -> TriangleSides:
    """Vertex-scale one triangle by corner factors ``u``; side a joins corners B and C."""
    u = np.asarray(u, dtype=float)
    pair = np.array([u[1] + u[2], u[2] + u[0], u[0] + u[1]])
    L = sides.as_array()
    if geometry == Geometry.EUCLIDEAN:
        out = np.exp(0.5 * pair) * L
    elif geometry == Geometry.HYPERBOLIC:
        out = 2.0 * np.arcsinh(np.exp(0.5 * pair) * np.sinh(0.5 * L))
    else:
        raise ValueError("vertex scaling is defined for E and H")
    return TriangleSides(*(float(v) for v in out))


def perturbation_bound_check(
    sides: TriangleSides,
    perturbed: TriangleSides,
    eps: float,
    geometry: Geometry,
) -> PerturbationReport:
    """
    Check that a small relative change of the sides moves angles and area
    by no more than the perturbation bounds.

    Euclidean: admissible when delta < eps^2 / 48; bounds 24 delta / eps on
    angles and 576 delta / eps^2 on relative area. Hyperbolic: admissible
    when delta < eps^3 / 60 and every side is at most 0.1; bounds
    30 delta / eps^2 and 120 delta / eps^2.

    Raises:
        PreconditionViolated: A hypothesis of the bound fails
    """
    if geometry not in (Geometry.EUCLIDEAN, Geometry.HYPERBOLIC):
        raise ValueError("perturbation bounds are defined for E and H")
    base_angles = angles(sides, geometry)
    if min(base_angles) < eps * (1.0 - 1e-12):
        raise PreconditionViolated(
            "min_angle", f"base angle {min(base_angles):.6g} is below eps = {eps:.6g}"
        )
    if geometry == Geometry.HYPERBOLIC and max(sides) > 0.1:
        raise PreconditionViolated("side_length", f"side {max(sides):.6g} exceeds 0.1")

    base = sides.as_array()
    delta = float(np.max(np.abs(perturbed.as_array() / base - 1.0)))
    if geometry == Geometry.EUCLIDEAN:
        threshold = eps ** 2 / 48.0
        angle_bound, area_bound = 24.0 * delta / eps, 576.0 * delta / eps ** 2
    else:
        threshold = eps ** 3 / 60.0
        angle_bound, area_bound = 30.0 * delta / eps ** 2, 120.0 * delta / eps ** 2
    if delta >= threshold:
        raise PreconditionViolated(
            "delta", f"relative deviation {delta:.6g} is not below {threshold:.6g}"
        )

    new_angles = angles(perturbed, geometry)
    angle_dev = float(np.max(np.abs(new_angles.as_array() - base_angles.as_array())))
    base_area = area(sides, geometry)
    area_dev = abs(area(perturbed, geometry) - base_area) / base_area
    return PerturbationReport(
        geometry=geometry,
        delta=delta,
        angle_dev=angle_dev,
        area_dev=area_dev,
        angle_bound=angle_bound,
        area_bound=area_bound,
        bound_ok=angle_dev <= angle_bound and area_dev <= area_bound,
    )
