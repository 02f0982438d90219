"""
Command-line interface for carreau-stokes

Exit statuses: 0 success, 1 solver non-convergence, 2 invalid
configuration, 3 I/O error. Diagnostics go to stderr, data to stdout or
files. Flags override configuration-file values, which override defaults.
"""

import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import click

from . import __version__
from .config import parse_config
from .constitutive import CarreauParams, check_constitutive
from .core import EXIT_CODES, INVALID_CONFIGURATION, IO_ERROR, CarreauStokesModule, exit_code
from .harness import StudySpec
from .logging_setup import configure_logging
from .manufactured import make_case, validate_forcing
from .mesh import dump_mesh, unit_square_mesh
from .stokes_types import (ERROR_FAMILIES, CaseId, CarreauStokesError, ConfigurationError, SolveOutcome,
                           format_number)

logger = logging.getLogger(__name__)

SOLVE_HEADER = "case,p,sigma,n,h,iters," + ",".join(ERROR_FAMILIES)


def _float_list(ctx, param, value: Optional[str]) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}")


def _int_list(ctx, param, value: Optional[str]) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}")


CASE_CHOICE = click.Choice([c.value for c in CaseId])

# flag name -> dotted StudySpec path
SPEC_FLAGS = {
    "case": "case",
    "p": "p",
    "eta_inf": "eta_inf",
    "eta0": "eta0",
    "lam": "lam",
    "kappa": "solver.kappa",
    "sigma": "sigma",
    "r_reg": "solver.r_reg",
    "degree": "degree",
    "levels": "levels",
    "tol": "solver.tol",
    "max_iter": "solver.max_iter",
    "quad_boost": "solver.quad_boost",
    "warm_start": "solver.warm_start",
    "out": "output_dir",
    "jobs": "jobs",
}


def spec_options(func):
    """Options shared by `solve` and `study`; every default is None so the config file wins"""
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False),
                     help="INI study configuration with [case] [solver] [mesh] [output] sections"),
        click.option("--case", type=CASE_CHOICE, help="Manufactured case (default: test1)"),
        click.option("--p", callback=_float_list,
                     help="Carreau exponent(s) in (1, 2], comma-separated (dimensionless; default: 1.6)"),
        click.option("--eta-inf", type=float,
                     help="Infinite-shear viscosity eta_inf, Pa*s (default: 0.5 for test1, 0 for test2)"),
        click.option("--eta0", type=float, help="Zero-shear viscosity eta0, Pa*s (default: 2)"),
        click.option("--lambda", "lam", type=float, help="Carreau time constant lambda, s (default: 1)"),
        click.option("--kappa", type=float, help="Heat diffusion coefficient kappa, m^2/s (default: 1)"),
        click.option("--sigma", callback=_float_list,
                     help="Regularization weight(s) sigma >= 0, comma-separated "
                          "(default: 0; test2 studies sweep 0,1e-2,1e-3,1e-4,1e-5)"),
        click.option("--r-reg", type=float, help="Regularization exponent r >= 2 (dimensionless; default: 2)"),
        click.option("--degree", type=int, help="Velocity/temperature degree, 2 or 3 (default: 2)"),
        click.option("--levels", callback=_int_list,
                     help="Mesh levels n (subdivisions per side), increasing (default: 8,16,32,64)"),
        click.option("--tol", type=float, help="Picard stopping tolerance, > 0 (default: 1e-10)"),
        click.option("--max-iter", type=int, help="Maximum Picard iterations (default: 100)"),
        click.option("--quad-boost", type=int,
                     help="Extra quadrature exactness for error norms, polynomial degree (default: 4)"),
        click.option("--warm-start/--no-warm-start", default=None,
                     help="Start each level from the previous level's solution (default: off)"),
        click.option("--out", type=click.Path(file_okay=False),
                     help="Output directory for CSV/SVG/YAML artifacts (default: results)"),
        click.option("--jobs", type=int, help="Worker processes for studies (default: 1)"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _build_spec(config_path: Optional[str], flags: Dict[str, Any]) -> StudySpec:
    overrides = {SPEC_FLAGS[name]: value for name, value in flags.items() if name in SPEC_FLAGS}
    return parse_config(config_path, overrides)


def _fail(ctx: click.Context, message: str, code: int) -> None:
    click.echo(f"Error: {message}", err=True)
    ctx.exit(code)


def format_solve_row(outcome: SolveOutcome) -> str:
    errors = outcome.errors.as_dict()
    cells = [outcome.case, format_number(outcome.p), format_number(outcome.sigma), str(outcome.n),
             format_number(outcome.h), str(outcome.log.iterations)]
    cells += [format_number(errors[f]) for f in ERROR_FAMILIES]
    return ",".join(cells)


@click.group()
@click.version_option(__version__, prog_name="carreau-stokes")
@click.option("-v", "--verbose", count=True, help="Increase log verbosity (-v info, -vv debug; default: warnings)")
@click.option("--log-format", type=click.Choice(["json", "text"]), default="json", show_default=True,
              help="Format of diagnostics written to stderr")
def cli(verbose: int, log_format: str):
    """Finite element solver for the non-isothermal Carreau Stokes problem"""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    configure_logging(level, json_format=log_format == "json")


@cli.command()
@spec_options
@click.option("--n", "n", type=int, default=16, show_default=True, help="Subdivisions per side of the unit square")
@click.option("--iteration-log", type=click.Path(dir_okay=False),
              help="Write the per-iteration CSV log to this file")
@click.option("--dump-mesh", "mesh_path", type=click.Path(dir_okay=False),
              help="Write the mesh in v/t/b text form to this file")
@click.pass_context
def solve(ctx: click.Context, config_path, n: int, iteration_log, mesh_path, **flags):
    """Solve one mesh level and print its error report row"""
    try:
        spec = _build_spec(config_path, flags)
    except ConfigurationError as e:
        _fail(ctx, str(e), EXIT_CODES[INVALID_CONFIGURATION])
    except OSError as e:
        _fail(ctx, f"cannot read {config_path}: {e.strerror or e}", EXIT_CODES[IO_ERROR])
    if n < 1:
        _fail(ctx, f"--n must be >= 1, got {n}", EXIT_CODES[INVALID_CONFIGURATION])

    module = CarreauStokesModule(spec)
    module.initialize()
    result = module.solve(spec, n)
    if not result.success:
        _fail(ctx, result.error, exit_code(result))

    outcome = result.data
    try:
        if iteration_log:
            Path(iteration_log).write_text(outcome.log.to_csv(), encoding="utf-8")
        if mesh_path:
            dump_mesh(unit_square_mesh(n), mesh_path)
    except OSError as e:
        _fail(ctx, f"cannot write output: {e}", EXIT_CODES[IO_ERROR])
    module.shutdown()

    click.echo(SOLVE_HEADER)
    click.echo(format_solve_row(outcome))


@cli.command()
@spec_options
@click.pass_context
def study(ctx: click.Context, config_path, **flags):
    """Run a multi-level convergence study and write CSV, SVG and metadata per series"""
    try:
        spec = _build_spec(config_path, flags)
    except ConfigurationError as e:
        _fail(ctx, str(e), EXIT_CODES[INVALID_CONFIGURATION])
    except OSError as e:
        _fail(ctx, f"cannot read {config_path}: {e.strerror or e}", EXIT_CODES[IO_ERROR])

    module = CarreauStokesModule(spec)
    module.initialize()
    result = module.run_study(spec)
    if not result.success:
        _fail(ctx, result.error, exit_code(result))

    report = result.data
    for path in report.artifacts:
        click.echo(path)
    if report.failed_rows:
        click.echo(f"Warning: {report.failed_rows} level(s) failed; see status columns", err=True)
    module.shutdown()


@cli.command("check-constitutive")
@click.option("--p", type=float, default=1.6, show_default=True, help="Carreau exponent in (1, 2]")
@click.option("--eta-inf", type=float, default=0.5, show_default=True, help="Infinite-shear viscosity, Pa*s")
@click.option("--eta0", type=float, default=2.0, show_default=True, help="Zero-shear viscosity, Pa*s")
@click.option("--lambda", "lam", type=float, default=1.0, show_default=True, help="Carreau time constant, s")
@click.option("--samples", type=int, default=100_000, show_default=True, help="Random symmetric tensor pairs")
@click.option("--seed", type=int, default=0, show_default=True, help="Random generator seed")
@click.pass_context
def check_constitutive_cmd(ctx: click.Context, p, eta_inf, eta0, lam, samples, seed):
    """Sample the Carreau monotonicity, Lipschitz and growth inequalities"""
    try:
        params = CarreauParams(eta_inf=eta_inf, eta0=eta0, lam=lam, p=p)
        report = check_constitutive(params, samples=samples, seed=seed)
    except (CarreauStokesError, ValueError) as e:
        _fail(ctx, str(e), EXIT_CODES[INVALID_CONFIGURATION])

    click.echo(f"samples={report.samples} seed={report.seed}")
    click.echo(f"min_pairing={format_number(report.min_pairing)}")
    click.echo(f"min_lower_bound_margin={format_number(report.min_lower_bound_margin)}")
    click.echo(f"{report.lipschitz_label}={format_number(report.lipschitz_sup)}")
    click.echo(f"growth_sup={format_number(report.growth_sup)}")
    if report.newtonian_deviation is not None:
        click.echo(f"newtonian_deviation={format_number(report.newtonian_deviation)}")
    for failure in report.failures:
        click.echo(f"FAILED: {failure}", err=True)
    ctx.exit(0 if report.passed else 1)


@cli.command("validate-forcing")
@click.option("--case", type=CASE_CHOICE, default="test1", show_default=True, help="Manufactured case")
@click.option("--p", type=float, default=1.6, show_default=True, help="Carreau exponent in (1, 2]")
@click.option("--eta-inf", type=float, default=None, help="Infinite-shear viscosity, Pa*s (default: case value)")
@click.option("--eta0", type=float, default=2.0, show_default=True, help="Zero-shear viscosity, Pa*s")
@click.option("--lambda", "lam", type=float, default=1.0, show_default=True, help="Carreau time constant, s")
@click.option("--kappa", type=float, default=1.0, show_default=True, help="Heat diffusion coefficient, m^2/s")
@click.option("--samples", type=int, default=1000, show_default=True, help="Random interior points")
@click.option("--seed", type=int, default=0, show_default=True, help="Random generator seed")
@click.pass_context
def validate_forcing_cmd(ctx: click.Context, case, p, eta_inf, eta0, lam, kappa, samples, seed):
    """Compare the closed-form forcings with a finite-difference oracle"""
    try:
        manufactured = make_case(case, p=p, eta_inf=eta_inf, eta0=eta0, lam=lam, kappa=kappa)
        result = validate_forcing(manufactured, samples=samples, seed=seed)
    except (CarreauStokesError, ValueError) as e:
        _fail(ctx, str(e), EXIT_CODES[INVALID_CONFIGURATION])

    click.echo(f"max_rel_f={format_number(result.max_rel_f)}")
    click.echo(f"max_rel_g={format_number(result.max_rel_g)}")
    click.echo(f"max_rel_deviation={format_number(result.max_deviation)}")
    ctx.exit(0 if result.passed else 1)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI without exiting the interpreter; returns the exit status"""
    try:
        code = cli.main(args=list(argv) if argv is not None else None, prog_name="carreau-stokes",
                        standalone_mode=False)
    except click.ClickException as e:
        e.show(file=sys.stderr)
        return EXIT_CODES[INVALID_CONFIGURATION]
    except click.Abort:
        return 1
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
