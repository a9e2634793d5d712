"""
Command-line interface.

Exit codes: 0 success, 1 I/O or parse error, 2 mesh, solver or surface error,
3 failed verification invariant or study threshold. Standard output carries
only JSON, CSV or TML; log messages go to standard error.
"""

import json
import logging
import sys
from pathlib import Path

import click
import numpy as np

from discrete_uniformization import __version__
from discrete_uniformization.core.config import (
    default_geodesic_options,
    default_solve_options,
    default_study_options,
    get_settings,
    load_solver_config,
)
from discrete_uniformization.core.conformal import scale_lengths
from discrete_uniformization.core.constants import K0
from discrete_uniformization.core.errors import (
    GraphError,
    MeshError,
    MeshParseError,
    RegularityLost,
    SolverError,
    SurfaceError,
    UniformizationError,
)
from discrete_uniformization.core.geodesic import ConformalTorus
from discrete_uniformization.core.graph import brute_force_isoperimetric_constant
from discrete_uniformization.core.mesh_io import format_tml, load_mesh
from discrete_uniformization.core.models import (
    Geometry,
    SolveMode,
    SolveOptions,
    SolveStatus,
    VerificationReport,
)
from discrete_uniformization.core.study import convergence_study
from discrete_uniformization.core.surfaces import (
    HyperbolicOctagonSurface,
    genus2_positions,
    parse_surface,
    sample_genus2_mesh,
    sample_torus_mesh,
    synthetic_factor,
)
from discrete_uniformization.core.uniformize import uniformize
from discrete_uniformization.core.verification import FAULTS, run_suites
from discrete_uniformization.exporters import export_json, export_study_csv

logger = logging.getLogger(__name__)

EXIT_IO = 1
EXIT_SOLVER = 2
EXIT_INVARIANT = 3

GENUS2_RECOVERY_TOL = 1e-8


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, level.upper(), logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def _emit(text: str, path: Path | None) -> None:
    """Write to ``path``, or to standard output when no path is given."""
    if path is None:
        click.echo(text, nl=not text.endswith("\n"))
    else:
        path.write_text(text)
        logger.info(f"Wrote {path}")


def _fail(ctx: click.Context, code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    ctx.exit(code)


def _solve_options(mode: str | None, tol: float | None, max_iter: int | None) -> SolveOptions:
    opts = default_solve_options(load_solver_config())
    overrides = {}
    if mode is not None:
        overrides["mode"] = SolveMode(mode)
    if tol is not None:
        overrides["tol_curvature"] = tol
    if max_iter is not None:
        overrides["max_iterations"] = max_iter
    return SolveOptions(**{**opts.model_dump(), **overrides})


def parse_resolutions(text: str) -> list[int]:
    """Comma list of integers; ``k0`` and ``k0+j`` name genus-2 subdivision levels."""
    out = []
    for item in filter(None, (s.strip().lower() for s in text.split(","))):
        if item.startswith("k0"):
            rest = item[2:]
            out.append(K0 + (int(rest) if rest else 0))
        else:
            out.append(int(item))
    return out


def _resolutions(value: str | None, default: str) -> list[int]:
    try:
        return parse_resolutions(value or default)
    except ValueError as e:
        raise click.BadParameter(f"cannot parse resolutions {value!r}: {e}") from e


def _surface(value: str):
    try:
        return parse_surface(value)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--surface") from e


solve_flags = [
    click.option("--mode", type=click.Choice([m.value for m in SolveMode]), default=None,
                 help="Solver mode (default from config/solver.toml)"),
    click.option("--tol", type=float, default=None, help="Curvature tolerance |K|inf"),
    click.option("--max-iter", type=int, default=None, help="Maximum Newton iterations"),
]


def with_solve_flags(func):
    for flag in reversed(solve_flags):
        func = flag(func)
    return func


@click.group()
@click.version_option(__version__)
@click.option("--log-level", default=None, help="Logging level (default DU_LOG_LEVEL or WARNING)")
@click.pass_context
def cli(ctx: click.Context, log_level: str | None):
    """Discrete uniformization of closed triangle meshes."""
    _configure_logging(log_level or get_settings().log_level)
    ctx.ensure_object(dict)


@cli.command("uniformize")
@click.option("--in", "input_path", type=click.Path(path_type=Path), required=True,
              help="TML or OFF mesh")
@click.option("--out", "output_path", type=click.Path(path_type=Path), default=None,
              help="SolveReport JSON (default: standard output)")
@click.option("--lengths-out", type=click.Path(path_type=Path), default=None,
              help="Write the uniformized edge lengths as TML")
@click.option("--geometry", type=click.Choice([Geometry.EUCLIDEAN.value, Geometry.HYPERBOLIC.value]),
              default=None, help="Geometry tag (default: inferred from genus)")
@with_solve_flags
@click.pass_context
def cmd_uniformize(ctx, input_path, output_path, lengths_out, geometry, mode, tol, max_iter):
    """Uniformize a mesh and write the SolveReport."""
    try:
        opts = _solve_options(mode, tol, max_iter)
    except ValueError as e:
        raise click.BadParameter(str(e)) from e

    try:
        mesh = load_mesh(input_path, Geometry(geometry) if geometry else None)
    except (OSError, MeshParseError) as e:
        _fail(ctx, EXIT_IO, f"cannot read {input_path}: {e}")
        return

    try:
        report = uniformize(mesh, opts)
    except (SolverError, MeshError, GraphError) as e:
        status = SolveStatus.REGULARITY_LOST if isinstance(e, RegularityLost) else SolveStatus.DIVERGED
        click.echo(json.dumps({"status": status.value, "error": str(e)}))
        _fail(ctx, EXIT_SOLVER, str(e))
        return

    _emit(export_json(report), output_path)
    if lengths_out is not None:
        lengths_out.write_text(format_tml(scale_lengths(mesh, np.asarray(report.u))))
        logger.info(f"Wrote uniformized lengths to {lengths_out}")


@cli.command("verify")
@click.option("--seed", type=int, default=None, help="Root seed (default DU_SEED)")
@click.option("--full", is_flag=True, help="Run the full instance counts")
@click.option("--out", "output_path", type=click.Path(path_type=Path), default=None)
@click.option("--fault", type=click.Choice(FAULTS), default=None, hidden=True)
@click.pass_context
def cmd_verify(ctx, seed, full, output_path, fault):
    """Run the invariant suites; exit 3 if any fails."""
    seed = get_settings().seed if seed is None else seed
    logger.info(f"Verification seed {seed}")
    suites = run_suites(seed, full=full, fault=fault)
    report = VerificationReport(seed=seed, full=full, passed=all(s.passed for s in suites), suites=suites)
    _emit(export_json(report), output_path)
    for suite in suites:
        click.echo(f"{suite.name}: {'pass' if suite.passed else 'FAIL'} (worst {suite.worst:.3e})", err=True)
    if not report.passed:
        ctx.exit(EXIT_INVARIANT)


@cli.command("study")
@click.option("--surface", "surface_spec", default="torus", help="torus[:amp=..,beta=..] or genus2[:amp=..]")
@click.option("--res", "resolutions", default=None, help="Comma list, e.g. 8,16,32,64 or k0,k0+1")
@click.option("--threshold", type=float, default=None, help="Minimum accepted slope (torus)")
@click.option("--out", "output_path", type=click.Path(path_type=Path), default=None)
@with_solve_flags
@click.pass_context
def cmd_study(ctx, surface_spec, resolutions, threshold, output_path, mode, tol, max_iter):
    """Convergence table as CSV; exit 3 if the slope (or exactness) check fails."""
    surface = _surface(surface_spec)
    is_torus = isinstance(surface, ConformalTorus)
    res = _resolutions(resolutions, "8,16,32,64" if is_torus else "k0,k0+1")
    config = load_solver_config()
    study_opts = default_study_options(config)
    if threshold is not None:
        study_opts = study_opts.model_copy(update={"slope_threshold": threshold})

    try:
        result = convergence_study(
            surface, res, _solve_options(mode, tol, max_iter), default_geodesic_options(config), study_opts
        )
    except ValueError as e:
        raise click.BadParameter(str(e)) from e
    except UniformizationError as e:
        _fail(ctx, EXIT_SOLVER, str(e))
        return

    _emit(export_study_csv(result), output_path)
    worst = max(row.error for row in result.rows)
    if not is_torus:
        click.echo(f"slope: n/a (max error {worst:.3e})", err=True)
        ok = worst <= GENUS2_RECOVERY_TOL
    elif result.slope is None:
        click.echo(f"slope: n/a (max error {worst:.3e})", err=True)
        ok = worst <= study_opts.flat_tolerance
    else:
        click.echo(f"slope: {result.slope:.6f} (threshold {study_opts.slope_threshold})", err=True)
        ok = result.slope >= study_opts.slope_threshold
    if not ok:
        ctx.exit(EXIT_INVARIANT)


@cli.command("mesh-gen")
@click.option("--surface", "surface_spec", default="torus", help="torus[:amp=..] or genus2[:amp=..]")
@click.option("--res", "resolution", default=None, help="Lattice size n (torus) or level k (genus2)")
@click.option("--out", "output_path", type=click.Path(path_type=Path), default=None)
@click.pass_context
def cmd_mesh_gen(ctx, surface_spec, resolution, output_path):
    """Write the TML mesh of a preset surface."""
    surface = _surface(surface_spec)
    is_torus = isinstance(surface, ConformalTorus)
    levels = _resolutions(resolution, "8" if is_torus else "k0")
    if len(levels) != 1:
        raise click.BadParameter("mesh-gen takes a single resolution", param_hint="--res")

    try:
        if is_torus:
            mesh, _ = sample_torus_mesh(surface, levels[0], default_geodesic_options())
        else:
            assert isinstance(surface, HyperbolicOctagonSurface)
            amplitude = surface.synthetic_amplitude or 0.0
            u_star = synthetic_factor(genus2_positions(levels[0]), amplitude) if amplitude else None
            mesh = sample_genus2_mesh(surface, levels[0], u_synthetic=u_star)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--res") from e
    except (SurfaceError, MeshError) as e:
        _fail(ctx, EXIT_SOLVER, str(e))
        return
    _emit(format_tml(mesh), output_path)


@cli.command("isoperimetric")
@click.option("--in", "input_path", type=click.Path(path_type=Path), required=True,
              help="TML or OFF mesh (at most 22 vertices)")
@click.pass_context
def cmd_isoperimetric(ctx, input_path):
    """Exact isoperimetric constant of a mesh's edge graph."""
    try:
        mesh = load_mesh(input_path)
    except (OSError, MeshParseError) as e:
        _fail(ctx, EXIT_IO, f"cannot read {input_path}: {e}")
        return
    try:
        result = brute_force_isoperimetric_constant(mesh.triangulation.graph(), mesh.lengths)
    except GraphError as e:
        _fail(ctx, EXIT_SOLVER, str(e))
        return
    click.echo(export_json(result))


def main():
    """Console script entry point."""
    cli(obj={})


if __name__ == "__main__":
    main()
