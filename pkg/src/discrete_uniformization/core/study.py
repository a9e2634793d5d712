"""
Convergence studies: sample a surface at several resolutions, uniformize, and
compare against the exact factor.
"""

import logging
import time

import numpy as np

from discrete_uniformization.core.geodesic import ConformalTorus
from discrete_uniformization.core.models import (
    GeodesicSolverOptions,
    SolveOptions,
    StudyOptions,
    StudyResult,
    StudyRow,
)
from discrete_uniformization.core.surfaces import (
    HyperbolicOctagonSurface,
    genus2_positions,
    sample_genus2_mesh,
    sample_torus_mesh,
    synthetic_factor,
)
from discrete_uniformization.core.uniformize import uniformize_euclidean, uniformize_hyperbolic

logger = logging.getLogger(__name__)


def fit_slope(h: list[float], errors: list[float], floor: float = 1e-10) -> float | None:
    """
    Least-squares slope of log error against log h.

    Returns None when every error is at or below ``floor`` (nothing to fit).
    """
    h_arr = np.asarray(h, dtype=float)
    e_arr = np.asarray(errors, dtype=float)
    if len(h_arr) < 2 or np.all(e_arr <= floor):
        return None
    e_arr = np.maximum(e_arr, np.finfo(float).tiny)
    slope, _ = np.polyfit(np.log(h_arr), np.log(e_arr), 1)
    return float(slope)


def _torus_row(
    t: ConformalTorus,
    n: int,
    solve_opts: SolveOptions,
    geodesic_opts: GeodesicSolverOptions,
    num_workers: int | None,
) -> StudyRow:
    start = time.perf_counter()
    mesh, u_bar = sample_torus_mesh(t, n, geodesic_opts, num_workers)
    report = uniformize_euclidean(mesh, solve_opts)
    error = float(np.max(np.abs(np.asarray(report.u) - u_bar)))
    return StudyRow(
        resolution=str(n),
        h=mesh.max_length,
        error=error,
        residual=report.residual,
        runtime_ms=1000.0 * (time.perf_counter() - start),
    )


def _genus2_row(s: HyperbolicOctagonSurface, k: int, solve_opts: SolveOptions, amplitude: float) -> StudyRow:
    start = time.perf_counter()
    u_star = synthetic_factor(genus2_positions(k), amplitude)
    mesh = sample_genus2_mesh(s, k, u_synthetic=u_star, strict=False)
    # the error in u is about |K| over the smallest eigenvalue of D - Lap, and D is O(l^2)
    tight = solve_opts.model_copy(update={"tol_curvature": min(solve_opts.tol_curvature, 1e-12)})
    report = uniformize_hyperbolic(mesh, tight)
    error = float(np.max(np.abs(np.asarray(report.u) + u_star)))
    return StudyRow(
        resolution=str(k),
        h=mesh.max_length,
        error=error,
        residual=report.residual,
        runtime_ms=1000.0 * (time.perf_counter() - start),
    )


def convergence_study(
    surface: ConformalTorus | HyperbolicOctagonSurface,
    resolutions: list[int],
    solve_opts: SolveOptions | None = None,
    geodesic_opts: GeodesicSolverOptions | None = None,
    study_opts: StudyOptions | None = None,
    num_workers: int | None = None,
) -> StudyResult:
    """
    Error ``|u - u_bar|inf`` per resolution and its fitted order in ``|l|inf``.

    Torus resolutions are lattice sizes n; genus-2 resolutions are
    subdivision levels k, where the synthetic factor is recovered exactly
    and no slope is fitted.

    Raises:
        ValueError: Fewer than three torus resolutions, or none at all
        SolverError, SurfaceError: Propagated from sampling or solving
    """
    if not resolutions:
        raise ValueError("a convergence study needs at least one resolution")
    if isinstance(surface, ConformalTorus) and len(resolutions) < 3:
        raise ValueError(f"a torus study needs at least 3 resolutions to fit a slope, got {len(resolutions)}")
    solve_opts = solve_opts or SolveOptions()
    geodesic_opts = geodesic_opts or GeodesicSolverOptions()
    study_opts = study_opts or StudyOptions()

    rows: list[StudyRow] = []
    for res in resolutions:
        if isinstance(surface, ConformalTorus):
            row = _torus_row(surface, res, solve_opts, geodesic_opts, num_workers)
        else:
            amplitude = surface.synthetic_amplitude
            if amplitude is None:
                amplitude = study_opts.synthetic_amplitude
            row = _genus2_row(surface, res, solve_opts, amplitude)
        logger.info(
            f"Study {surface.label()} at {row.resolution}: h = {row.h:.4g}, "
            f"error = {row.error:.3e}, {row.runtime_ms:.0f} ms"
        )
        rows.append(row)

    slope = None
    if isinstance(surface, ConformalTorus):
        slope = fit_slope([r.h for r in rows], [r.error for r in rows], study_opts.flat_tolerance)
    return StudyResult(surface=surface.label(), rows=rows, slope=slope)
