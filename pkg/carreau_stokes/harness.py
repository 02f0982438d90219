"""
harness: multi-level convergence studies

A study runs every (p, sigma) series over the configured mesh levels, turns
per-level failures into NaN rows, computes experimental orders of
convergence and, when an output directory is set, writes one CSV, one SVG
and one YAML metadata file per series.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from . import __version__
from .fe_space import DiscreteSpaces, build_spaces
from .manufactured import DEFAULT_ETA_INF, ManufacturedCase, error_norms, eoc, make_case
from .mesh import Mesh, metrics, refine_uniform, unit_square_mesh
from .reporting import emit_csv, emit_loglog_svg, write_metadata
from .solver import SolverConfig, norm_exponents, picard_solve, transfer_state
from .stokes_types import (ERROR_FAMILIES, CaseId, ConvergenceReport, ConvergenceRow, CoupledState,
                           DivergenceError, NonConvergenceError, ReportError, RunStatus,
                           SingularSystemError, SolveOutcome, StudyReport)

logger = logging.getLogger(__name__)

DEFAULT_LEVELS = [8, 16, 32, 64]
DEFAULT_TEST2_SIGMAS = [0.0, 1e-2, 1e-3, 1e-4, 1e-5]
SIGMA_TERM_CONVENTION = "nu-weighted: 2 nu(theta) sigma |eps(u)|^(r-2) eps(u) added to the Carreau stress"


class StudySpec(BaseModel):
    """Parameters of a convergence study"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    case: CaseId = Field(CaseId.TEST1, description="Manufactured case")
    p: List[float] = Field(default_factory=lambda: [1.6], description="Carreau exponents")
    eta_inf: Optional[float] = Field(None, ge=0, description="eta_inf; case default when unset")
    eta0: float = Field(2.0, gt=0, description="Zero-shear viscosity eta0")
    lam: float = Field(1.0, gt=0, description="Carreau time constant lambda")
    degree: int = Field(2, description="Velocity/temperature degree (pressure uses degree-1)")
    levels: List[int] = Field(default_factory=lambda: list(DEFAULT_LEVELS), description="Mesh levels n")
    sigma: List[float] = Field(default_factory=list, description="Regularization sweep")
    solver: SolverConfig = Field(default_factory=SolverConfig)
    output_dir: Path = Field(Path("results"), description="Directory for study artifacts")
    jobs: int = Field(1, ge=1, description="Worker processes")

    @field_validator("p")
    @classmethod
    def _check_p(cls, values: List[float]) -> List[float]:
        if not values:
            raise ValueError("at least one p is required")
        for p in values:
            if not 1.0 < p <= 2.0:
                raise ValueError(f"p must lie in (1, 2], got {p}")
        return values

    @field_validator("degree")
    @classmethod
    def _check_degree(cls, value: int) -> int:
        if value not in (2, 3):
            raise ValueError(f"degree must be 2 or 3, got {value}")
        return value

    @field_validator("levels")
    @classmethod
    def _check_levels(cls, values: List[int]) -> List[int]:
        if not values:
            raise ValueError("at least one mesh level is required")
        if any(n < 1 for n in values):
            raise ValueError("mesh levels must be positive")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("mesh levels must be strictly increasing")
        return values

    @field_validator("sigma")
    @classmethod
    def _check_sigma(cls, values: List[float]) -> List[float]:
        if any(s < 0 for s in values):
            raise ValueError("sigma values must be >= 0")
        return values

    @model_validator(mode="after")
    def _check_eta(self) -> "StudySpec":
        eta_inf = self.resolved_eta_inf
        if not self.eta0 > eta_inf:
            raise ValueError(f"eta0 must exceed eta_inf, got eta0={self.eta0}, eta_inf={eta_inf}")
        return self

    @property
    def resolved_eta_inf(self) -> float:
        return self.eta_inf if self.eta_inf is not None else DEFAULT_ETA_INF[self.case]

    def sigma_values(self) -> List[float]:
        if self.sigma:
            return list(self.sigma)
        if self.case == CaseId.TEST2:
            return list(DEFAULT_TEST2_SIGMAS)
        return [self.solver.sigma]

    def make_case(self, p: float) -> ManufacturedCase:
        return make_case(self.case, p=p, eta_inf=self.resolved_eta_inf, eta0=self.eta0,
                         lam=self.lam, kappa=self.solver.kappa)

    def series(self) -> List[Tuple[float, float]]:
        return [(p, sigma) for p in self.p for sigma in self.sigma_values()]


def build_meshes(levels: Sequence[int]) -> Dict[int, Mesh]:
    """unit_square_mesh per level, refining the previous level when n doubles"""
    meshes: Dict[int, Mesh] = {}
    previous: Optional[int] = None
    for n in levels:
        if previous is not None and n == 2 * previous:
            meshes[n] = refine_uniform(meshes[previous])
        else:
            meshes[n] = unit_square_mesh(n)
        previous = n
    return meshes


def solve_level(spec: StudySpec, p: float, sigma: float, n: int, mesh: Optional[Mesh] = None,
                initial: Optional[CoupledState] = None,
                spaces: Optional[DiscreteSpaces] = None) -> Tuple[SolveOutcome, DiscreteSpaces]:
    """One Picard solve plus its error report; returns (outcome, spaces)"""
    mesh = mesh if mesh is not None else unit_square_mesh(n)
    case = spec.make_case(p)
    config = spec.solver.model_copy(update={"sigma": sigma})
    spaces = spaces if spaces is not None else build_spaces(mesh, spec.degree, config.quad_exactness)
    state, log = picard_solve(mesh, spaces, case.params, case.viscosity, case, config, initial=initial)
    errors = error_norms(state, spaces, case, config.quad_boost)
    outcome = SolveOutcome(case=case.name, p=p, sigma=sigma, n=n, h=metrics(mesh).h_max,
                           ndofs=spaces.ndofs, state=state, log=log, errors=errors)
    return outcome, spaces


def _failure_status(error: Exception) -> RunStatus:
    if isinstance(error, DivergenceError):
        return RunStatus.DIVERGENCE
    if isinstance(error, NonConvergenceError):
        return RunStatus.NON_CONVERGENCE
    return RunStatus.SINGULAR


def run_series(spec: StudySpec, p: float, sigma: float,
               meshes: Optional[Dict[int, Mesh]] = None) -> ConvergenceReport:
    """Solve every level of one (p, sigma) series; failures become NaN rows"""
    meshes = meshes or build_meshes(spec.levels)
    report = ConvergenceReport(case=spec.case.value, p=p, sigma=sigma, degree=spec.degree)
    previous: Optional[Tuple[CoupledState, DiscreteSpaces]] = None

    for n in spec.levels:
        mesh = meshes[n]
        h = metrics(mesh).h_max
        initial = None
        spaces = build_spaces(mesh, spec.degree, spec.solver.quad_exactness)
        if spec.solver.warm_start and previous is not None:
            initial = transfer_state(previous[0], previous[1], spaces)
        try:
            outcome, spaces = solve_level(spec, p, sigma, n, mesh, initial, spaces)
        except (NonConvergenceError, SingularSystemError) as e:
            logger.warning(f"Level n={n} failed for p={p:g}, sigma={sigma:g}: {e}")
            iters = e.log.iterations if isinstance(e, NonConvergenceError) else 0
            n_u, n_p, n_t = spaces.ndofs
            report.rows.append(ConvergenceRow(level=n, h=h, ndof_u=n_u, ndof_p=n_p, ndof_t=n_t,
                                              iters=iters, status=_failure_status(e), message=str(e)))
            previous = None
            continue

        errors = outcome.errors.as_dict()
        n_u, n_p, n_t = outcome.ndofs
        report.rows.append(ConvergenceRow(
            level=n, h=h, ndof_u=n_u, ndof_p=n_p, ndof_t=n_t, iters=outcome.log.iterations,
            err_u_l2=errors["err_u_l2"], err_u_w1s=errors["err_u_w1s"],
            err_pi=errors["err_pi"], err_t_h1=errors["err_t_h1"],
        ))
        previous = (outcome.state, spaces)
        logger.info(f"Level n={n} done for p={p:g}, sigma={sigma:g}",
                    extra={"level": n, "h": h, "iters": outcome.log.iterations, **errors})

    report.eocs = series_eocs(report.rows)
    report.metadata = series_metadata(spec, report)
    return report


def series_eocs(rows: Sequence[ConvergenceRow]) -> Dict[str, List[float]]:
    """Orders between consecutive levels; NaN where either level failed"""
    eocs: Dict[str, List[float]] = {}
    for family in ERROR_FAMILIES:
        orders = []
        for a, b in zip(rows, rows[1:]):
            ea, eb = a.error(family), b.error(family)
            if a.ok and b.ok and ea > 0 and eb > 0:
                orders.append(float(eoc([ea, eb], [a.h, b.h])[0]))
            else:
                orders.append(math.nan)
        eocs[family] = orders
    return eocs


def series_metadata(spec: StudySpec, report: ConvergenceReport) -> Dict[str, object]:
    case = spec.make_case(report.p)
    config = spec.solver.model_copy(update={"sigma": report.sigma})
    s, s_dual, diag = norm_exponents(case.params, config)
    assembly_exactness = config.quad_exactness or min(2 * spec.degree + 4, 12)
    return {
        "tool_version": __version__,
        "case": spec.case.value,
        "degree": spec.degree,
        "elements": f"P{spec.degree}/P{spec.degree - 1}/P{spec.degree}",
        "levels": list(spec.levels),
        "p": report.p,
        "eta_inf": case.params.eta_inf,
        "eta0": case.params.eta0,
        "lambda": case.params.lam,
        "viscosity": case.viscosity.kind.value,
        "kappa": case.kappa,
        "kappa_note": "heat diffusion defaults to 1 unless configured",
        "sigma": report.sigma,
        "r_reg": config.r_reg,
        "sigma_term": SIGMA_TERM_CONVENTION,
        "tol": config.tol,
        "max_iter": config.max_iter,
        "norm_family": "s=2 (eta_inf > 0)" if s == 2.0 and case.params.eta_inf > 0 else "s=p (eta_inf = 0)",
        "s": s,
        "s_dual": s_dual,
        "diagnostic_exponent": diag,
        "assembly_quadrature_exactness": assembly_exactness,
        "error_quadrature_exactness": min(assembly_exactness + config.quad_boost, 12),
        "flux_correction": config.flux_correction,
        "convection_velocity": config.convection_velocity.value,
        "warm_start": config.warm_start,
        "iterations": [row.iters for row in report.rows],
        "status": [int(row.status) for row in report.rows],
        "eoc": {k: list(v) for k, v in report.eocs.items()},
    }


def _run_series_task(args) -> ConvergenceReport:
    spec, p, sigma, meshes = args
    return run_series(spec, p, sigma, meshes)


def run_study(spec: StudySpec, write: bool = True) -> StudyReport:
    """Run every (p, sigma) series; reports keep the study order

    Raises:
        OSError: when the output directory cannot be written
    """
    meshes = build_meshes(spec.levels)
    series = spec.series()
    logger.info(f"Starting study: case={spec.case.value}, degree={spec.degree}, "
                f"{len(series)} series, levels={spec.levels}")

    if spec.jobs > 1 and len(series) > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            reports = list(pool.map(_run_series_task, [(spec, p, s, meshes) for p, s in series]))
    else:
        reports = [run_series(spec, p, s, meshes) for p, s in series]

    study = StudyReport(reports=reports)
    if write:
        study.artifacts = write_artifacts(study, spec.output_dir)
    logger.info(f"Study finished with {study.failed_rows} failed levels")
    return study


def write_artifacts(study: StudyReport, output_dir: Path) -> List[str]:
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    written: List[str] = []
    for report in study.reports:
        csv_path = output_dir / f"{report.label}.csv"
        meta_path = output_dir / f"{report.label}.meta.yaml"
        svg_path = output_dir / f"{report.label}.svg"
        emit_csv(report, csv_path)
        write_metadata(report, meta_path)
        written += [str(csv_path), str(meta_path)]
        reference = study.find(report.p, 0.0) or report
        try:
            emit_loglog_svg(report, svg_path, reference=reference)
            written.append(str(svg_path))
        except ReportError as e:
            logger.warning(f"No plot for {report.label}: {e}")
    return written
