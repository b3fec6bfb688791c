import asyncio
import logging
import sys
from dataclasses import replace
from pathlib import Path

import click
from pydantic import ValidationError

from src.config import Settings, load_settings
from src.errors import SolverError
from src.fem.mesh import uniform_mesh
from src.loads import builtin_loads
from src.logging_config import setup_logging
from src.models import BOUNDARY_CONDITIONS, ERROR_FIELDS, ConvergenceRecord, StudyConfig
from src.services.analysis import compute_errors
from src.services.dpg_core import assemble_and_solve
from src.services.exact_solution import solve_exact
from src.services.study import StudyRunner
from src.utils.csvio import save_records, study_path
from src.utils.text import fmt_value, format_rate_table, gnuplot_script

log = logging.getLogger("main")

EXIT_OK = 0
EXIT_BAD_ARGS = 1
EXIT_SOLVER_FAILURE = 2

def _float_list(ctx: click.Context, param: click.Parameter, value: str) -> list[float]:
    try:
        return [float(x) for x in value.split(",") if x.strip()]
    except ValueError:
        raise click.BadParameter(f"expected a comma separated list of numbers, got {value!r}")

def _int_list(ctx: click.Context, param: click.Parameter, value: str) -> list[int]:
    try:
        return [int(x) for x in value.split(",") if x.strip()]
    except ValueError:
        raise click.BadParameter(f"expected a comma separated list of integers, got {value!r}")

def _resolve_out(settings: Settings, out: str) -> Path:
    # only a bare file name goes to the output directory; "./x.csv" stays in the working directory
    path = Path(out)
    if path.name == out:
        return settings.output_dir / path
    return path

@click.group()
@click.pass_context
def cli(ctx: click.Context) -> None:
    """DPG solver for the scaled Timoshenko beam."""
    try:
        settings = load_settings()
    except ValueError as ex:
        raise click.ClickException(f"invalid environment: {ex}")
    setup_logging(settings.log_level)
    ctx.obj = settings

@cli.command()
@click.option("--bc", type=click.Choice(BOUNDARY_CONDITIONS), default="cf", show_default=True)
@click.option("--t", "t_values", default="1,1e-3,1e-6,0", show_default=True, callback=_float_list,
              help="Comma separated thickness values in [0, 1].")
@click.option("--p", "p_values", default="0,1,2", show_default=True, callback=_int_list,
              help="Comma separated polynomial degrees.")
@click.option("--n0", default=8, show_default=True, type=int, help="Elements on the coarsest mesh.")
@click.option("--levels", default=5, show_default=True, type=int, help="Number of uniform refinements solved.")
@click.option("--load", "load_name", type=click.Choice(sorted(builtin_loads())), default="sin", show_default=True)
@click.option("--out", default="convergence.csv", show_default=True,
              help="CSV path; one file per (t, p) pair when the grid has several.")
@click.option("--gnuplot", is_flag=True, help="Also write a gnuplot script next to the CSV.")
@click.option("--condition", is_flag=True, help="Estimate the condition number of every global matrix.")
@click.option("--workers", type=int, default=None, help="Levels solved concurrently (overrides DPG_WORKERS).")
@click.pass_obj
def study(
    settings: Settings,
    bc: str,
    t_values: list[float],
    p_values: list[int],
    n0: int,
    levels: int,
    load_name: str,
    out: str,
    gnuplot: bool,
    condition: bool,
    workers: int | None,
) -> int:
    """Convergence study on a sequence of uniform meshes."""
    try:
        cfg = StudyConfig(
            bc=bc, t=t_values, p=p_values, n0=n0, levels=levels,
            load=load_name, out=out, gnuplot=gnuplot, condition=condition,
        )
    except ValidationError as ex:
        raise click.UsageError(str(ex))
    if workers is not None:
        if workers < 1:
            raise click.BadParameter("must be positive", param_hint="--workers")
        settings = replace(settings, workers=workers)

    try:
        records = asyncio.run(StudyRunner(settings).run(cfg))
    except SolverError as ex:
        log.error("Study aborted: %s", ex)
        return EXIT_SOLVER_FAILURE

    out_path = _resolve_out(settings, cfg.out)
    single = len(cfg.t) * len(cfg.p) == 1
    paths: dict[tuple[float, int], Path] = {}
    for t in cfg.t:
        for p in cfg.p:
            group = [r for r in records if r.t == t and r.p == p]
            path = study_path(out_path, t, p, single)
            save_records(path, group)
            paths[(t, p)] = path
            click.echo(format_rate_table(cfg.bc, t, p, group))

    if cfg.gnuplot:
        script = out_path.with_suffix(".gp")
        script.write_text(gnuplot_script(paths), encoding="utf-8")
        click.echo(f"gnuplot script: {script}")

    if all(r.failed for r in records):
        log.error("Every level failed")
        return EXIT_SOLVER_FAILURE
    return EXIT_OK

@cli.command()
@click.option("--bc", type=click.Choice(BOUNDARY_CONDITIONS), default="cf", show_default=True)
@click.option("--t", "t_value", type=float, default=0.0, show_default=True)
@click.option("--p", "p_value", type=int, default=1, show_default=True)
@click.option("--n", "n_value", type=int, default=16, show_default=True)
@click.option("--load", "load_name", type=click.Choice(sorted(builtin_loads())), default="sin", show_default=True)
@click.pass_obj
def solve(settings: Settings, bc: str, t_value: float, p_value: int, n_value: int, load_name: str) -> int:
    """Single solve; prints the error record."""
    if not 0.0 <= t_value <= 1.0:
        raise click.BadParameter("must lie in [0, 1]", param_hint="--t")
    if p_value < 0:
        raise click.BadParameter("must be nonnegative", param_hint="--p")
    if n_value < 1:
        raise click.BadParameter("must be positive", param_hint="--n")

    load = builtin_loads()[load_name]
    try:
        exact = solve_exact(bc, t_value, load)
        sol = assemble_and_solve(
            uniform_mesh(n_value), bc, t_value, p_value, load,
            quad_extra=settings.quad_extra, permute=settings.permute,
            refinement_steps=settings.refinement_steps,
        )
    except SolverError as ex:
        log.error("Solve failed: %s", ex)
        return EXIT_SOLVER_FAILURE

    rec: ConvergenceRecord = compute_errors(sol, exact, error_quad_extra=settings.error_quad_extra)
    click.echo(f"bc={bc} t={t_value:g} p={p_value} n={rec.n} dofs={rec.dofs}")
    for name in ERROR_FIELDS:
        click.echo(f"  {name:>8}: {fmt_value(getattr(rec, name))}")
    return EXIT_OK

def main(argv: list[str] | None = None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="dpg-beam", standalone_mode=False)
    except click.ClickException as ex:
        ex.show()
        return EXIT_BAD_ARGS
    except click.Abort:
        return EXIT_BAD_ARGS
    return rv if isinstance(rv, int) else EXIT_OK

if __name__ == "__main__":
    sys.exit(main())
