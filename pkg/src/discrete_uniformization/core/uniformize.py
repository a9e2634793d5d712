"""
Solve K(u) = 0 by damped Newton, or by following the curvature-interpolation
flow with a Newton corrector at every step.

Euclidean solutions are normalized to total area 1 by a final constant shift
(constant shifts do not change Euclidean angles). Hyperbolic solutions are
unique and need no normalization.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from discrete_uniformization.core.conformal import (
    curvature_of,
    jacobian_of,
    scale_lengths,
    total_area,
)
from discrete_uniformization.core.errors import (
    GeometryMismatch,
    RegularityLost,
    SingularSystem,
    SolverDiverged,
    TriangleInequalityViolated,
    WrongGenus,
)
from discrete_uniformization.core.graph import (
    Graph,
    MeanZeroLaplacianSolver,
    ShiftedLaplacianSolver,
)
from discrete_uniformization.core.mesh import MeshMetric, check_metric
from discrete_uniformization.core.models import (
    Geometry,
    RegularityReport,
    SolveMode,
    SolveOptions,
    SolveReport,
    SolveStatus,
)

logger = logging.getLogger(__name__)


@dataclass
class _NewtonResult:
    u: np.ndarray
    metric: MeshMetric
    iterations: int
    history: list[float] = field(default_factory=list)


def mesh_area(m: MeshMetric, u: np.ndarray | None = None) -> float:
    """Total area of the scaled mesh in its own geometry."""
    return total_area(scale_lengths(m, u))


def _require(m: MeshMetric, geometry: Geometry) -> None:
    if m.geometry != geometry:
        raise GeometryMismatch(f"expected a {geometry.name.lower()} metric, got {m.geometry.name.lower()}")
    genus = m.triangulation.genus
    if geometry == Geometry.EUCLIDEAN and genus != 1:
        raise WrongGenus(genus, "genus 1")
    if geometry == Geometry.HYPERBOLIC and genus <= 1:
        raise WrongGenus(genus, "genus > 1")


def _newton_direction(metric: MeshMetric, graph: Graph, rhs: np.ndarray) -> np.ndarray:
    """Solve ``(dK/du) delta = -rhs`` at the current metric."""
    J = jacobian_of(metric, graph)
    try:
        if metric.geometry == Geometry.EUCLIDEAN:
            # dK/du = -Lap, restricted to mean-zero fields
            return MeanZeroLaplacianSolver(graph, J.eta).solve(rhs - rhs.mean())
        return -ShiftedLaplacianSolver(graph, J.eta, J.D).solve(rhs)
    except SingularSystem as e:
        raise SolverDiverged(f"Newton system is singular: {e}", float(np.max(np.abs(rhs)))) from e


def _is_regular(report: RegularityReport, floor: tuple[float, float]) -> bool:
    return report.is_regular(floor[0], floor[1])


def _newton(
    m: MeshMetric,
    graph: Graph,
    u0: np.ndarray,
    opts: SolveOptions,
    target: np.ndarray | None = None,
) -> _NewtonResult:
    """Damped Newton on ``K(u) = target`` with step halving."""
    u = u0.copy()
    metric = scale_lengths(m, u)
    report = check_metric(metric)
    if not _is_regular(report, opts.regularity_floor):
        raise RegularityLost("initial metric is below the regularity floor",
                             report.min_angle, report.max_opposite_angle_sum)

    target = np.zeros_like(u) if target is None else target
    F = curvature_of(metric) - target
    res = float(np.max(np.abs(F)))
    history = [res]

    for iteration in range(opts.max_iterations + 1):
        if res <= opts.tol_curvature:
            return _NewtonResult(u=u, metric=metric, iterations=iteration, history=history)
        if iteration == opts.max_iterations:
            break

        delta = _newton_direction(metric, graph, F)
        step, reason = 1.0, "residual"
        accepted = False
        while step >= opts.min_step:
            trial = u + step * delta
            try:
                trial_metric = scale_lengths(m, trial)
            except TriangleInequalityViolated:
                reason = "metric"
                step *= opts.damping
                continue
            trial_report = check_metric(trial_metric)
            if not _is_regular(trial_report, opts.regularity_floor):
                reason, report = "regularity", trial_report
                step *= opts.damping
                continue
            trial_F = curvature_of(trial_metric) - target
            trial_res = float(np.max(np.abs(trial_F)))
            if trial_res < res:
                accepted = True
                break
            reason = "residual"
            step *= opts.damping

        if not accepted:
            if reason == "regularity":
                raise RegularityLost("every damped step falls below the regularity floor",
                                     report.min_angle, report.max_opposite_angle_sum)
            raise SolverDiverged(f"no decrease after full damping ({reason})", res)

        u, metric, F, res = trial, trial_metric, trial_F, trial_res
        history.append(res)
        logger.debug(f"Newton iteration {iteration + 1}: step {step:.3g}, |K|inf = {res:.3e}")

    raise SolverDiverged(f"not converged in {opts.max_iterations} iterations", res)


def _finish(
    m: MeshMetric,
    u: np.ndarray,
    opts: SolveOptions,
    iterations: int,
    history: list[float],
    **extra,
) -> SolveReport:
    """Normalize (Euclidean) and package the report."""
    u_mean_zero = None
    area_before = None
    if m.geometry == Geometry.EUCLIDEAN:
        u_mean_zero = u - u.mean()
        area_before = mesh_area(m, u_mean_zero)
        u = u_mean_zero - 0.5 * math.log(area_before)
    final = scale_lengths(m, u)
    report = SolveReport(
        status=SolveStatus.CONVERGED,
        geometry=m.geometry,
        mode=opts.mode,
        iterations=iterations,
        residual_history=history,
        u=u.tolist(),
        u_mean_zero=None if u_mean_zero is None else u_mean_zero.tolist(),
        area=total_area(final),
        area_before_normalization=area_before,
        regularity=check_metric(final),
        **extra,
    )
    logger.info(
        f"Uniformized {m.triangulation!r} ({opts.mode.value}) in {iterations} iterations, "
        f"|K|inf = {report.residual:.3e}"
    )
    return report


def _initial(m: MeshMetric, u0: np.ndarray | None) -> np.ndarray:
    n = m.triangulation.vertex_count
    return np.zeros(n) if u0 is None else np.asarray(u0, dtype=float).copy()


def _newton_solve(m: MeshMetric, opts: SolveOptions, u0: np.ndarray | None) -> SolveReport:
    graph = m.triangulation.graph()
    logger.info(f"Newton solve on {m.triangulation!r}, geometry {m.geometry.value}")
    result = _newton(m, graph, _initial(m, u0), opts)
    return _finish(m, result.u, opts, result.iterations, result.history)


def uniformize_euclidean(
    m: MeshMetric, opts: SolveOptions | None = None, u0: np.ndarray | None = None
) -> SolveReport:
    """
    Flat uniformization of a genus-1 mesh, normalized to area 1.

    Raises:
        WrongGenus: Genus is not 1
        SolverDiverged: Residual stops decreasing or iterations run out
        RegularityLost: Every admissible step drops below the regularity floor
    """
    opts = opts or SolveOptions()
    _require(m, Geometry.EUCLIDEAN)
    if opts.mode == SolveMode.FLOW:
        return flow_solve(m, opts, u0)
    return _newton_solve(m, opts, u0)


def uniformize_hyperbolic(
    m: MeshMetric, opts: SolveOptions | None = None, u0: np.ndarray | None = None
) -> SolveReport:
    """
    Hyperbolic uniformization of a mesh of genus > 1.

    Raises:
        WrongGenus: Genus is at most 1
        SolverDiverged: Residual stops decreasing or iterations run out
        RegularityLost: Every admissible step drops below the regularity floor
    """
    opts = opts or SolveOptions()
    _require(m, Geometry.HYPERBOLIC)
    if opts.mode == SolveMode.FLOW:
        return flow_solve(m, opts, u0)
    return _newton_solve(m, opts, u0)


def uniformize(
    m: MeshMetric, opts: SolveOptions | None = None, u0: np.ndarray | None = None
) -> SolveReport:
    """Dispatch on the metric's geometry tag."""
    if m.geometry == Geometry.EUCLIDEAN:
        return uniformize_euclidean(m, opts, u0)
    return uniformize_hyperbolic(m, opts, u0)


def flow_solve(
    m: MeshMetric, opts: SolveOptions | None = None, u0: np.ndarray | None = None
) -> SolveReport:
    """
    Follow ``u' = -(dK/du)^-1 K(u0)`` from t = 0 to 1.

    Along the exact flow ``K(u(t)) = (1 - t) K(u0)``. Each explicit Euler step
    is corrected by Newton onto that curvature before moving on.
    """
    opts = opts or SolveOptions()
    opts = opts.model_copy(update={"mode": SolveMode.FLOW})
    _require(m, m.geometry)
    graph = m.triangulation.graph()
    u = _initial(m, u0)

    start = scale_lengths(m, u)
    K0 = curvature_of(start)
    history = [float(np.max(np.abs(K0)))]
    logger.info(f"Flow solve on {m.triangulation!r}, {opts.flow_steps} steps, |K0|inf = {history[0]:.3e}")
    if history[0] <= opts.tol_curvature:
        return _finish(m, u, opts, 0, history, max_flow_speed=0.0)

    h = 1.0 / opts.flow_steps
    metric = start
    iterations = 0
    max_speed = 0.0
    invariant: list[float] = []
    for k in range(1, opts.flow_steps + 1):
        # dK/du u' = -K0
        velocity = _newton_direction(metric, graph, K0)
        max_speed = max(max_speed, float(np.max(np.abs(velocity))))

        predictor = u + h * velocity
        try:
            scale_lengths(m, predictor)
        except TriangleInequalityViolated:
            logger.debug(f"Flow step {k}: predictor left the metric domain, correcting from u")
            predictor = u

        target = (1.0 - k * h) * K0 if k < opts.flow_steps else np.zeros_like(K0)
        result = _newton(m, graph, predictor, opts, target=target)
        u, metric = result.u, result.metric
        iterations += result.iterations

        K = curvature_of(metric)
        invariant.append(float(np.max(np.abs(K - target))))
        history.append(float(np.max(np.abs(K))))
        logger.debug(f"Flow step {k}: t = {k * h:.4f}, invariant residual {invariant[-1]:.3e}")

    return _finish(
        m, u, opts, iterations, history,
        max_flow_speed=max_speed, flow_invariant_residuals=invariant,
    )
