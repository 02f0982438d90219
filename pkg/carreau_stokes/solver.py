"""
solver: Picard iteration for the coupled Carreau Stokes / heat problem

Step 1 freezes the viscosity at (u_k, theta_k) and solves the Stokes saddle
point system with a pressure-mean multiplier; Step 2 solves the diffusion
plus skew-convection temperature problem; Step 3 measures the increments
(velocity in L^s, pressure in L^s', temperature in L^2) against tol.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field
from scipy.sparse.linalg import norm as sparse_norm
from scipy.sparse.linalg import splu

from .assembly import (FrozenCoefficients, SparseSystem, apply_dirichlet, assemble_a1_frozen,
                       assemble_a2, assemble_b, assemble_ch, assemble_loads, boundary_values,
                       flux_corrected_values, saddle_system, zero_mean_constraint)
from .constitutive import CarreauParams, ViscosityModel
from .fe_space import DiscreteSpaces, lp_norm, strain_magnitude, vector_magnitude
from .manufactured import ManufacturedCase
from .mesh import Mesh
from .stokes_types import (ConfigurationError, ConvectionVelocity, CoupledState, DivergenceError,
                           IterationLog, IterationRecord, MeshMismatchError, NonConvergenceError,
                           SingularSystemError)

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-9
DIVERGENCE_TOLERANCE = 1e-9


class SolverConfig(BaseModel):
    """Picard and discretization settings"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    tol: float = Field(1e-10, gt=0, description="Fixed-point stopping tolerance")
    max_iter: int = Field(100, ge=1, description="Maximum Picard iterations")
    sigma: float = Field(0.0, ge=0, description="Regularization weight sigma")
    r_reg: float = Field(2.0, ge=2, description="Regularization exponent r")
    kappa: float = Field(1.0, gt=0, description="Heat diffusion coefficient")
    quad_exactness: Optional[int] = Field(None, ge=1, le=12, description="Assembly quadrature exactness")
    quad_boost: int = Field(4, ge=0, description="Extra exactness for error norms")
    warm_start: bool = Field(False, description="Start each level from the previous level's solution")
    flux_correction: bool = Field(True, description="Remove the net flux of velocity boundary data")
    convection_velocity: ConvectionVelocity = Field(ConvectionVelocity.CURRENT,
                                                    description="Velocity iterate used in Step 2")
    diag_p2: Optional[float] = Field(None, gt=0, description="Exponent p2 of the diagnostic strain norm")
    divergence_factor: float = Field(10.0, gt=1, description="Growth factor flagged as divergence")
    divergence_patience: int = Field(3, ge=1, description="Consecutive growths before aborting")


@dataclass(eq=False)
class Discretization:
    """Iteration-independent matrices, loads and boundary data"""
    spaces: DiscreteSpaces
    B: sp.csr_matrix
    m: np.ndarray
    a2: sp.csr_matrix
    f_vec: np.ndarray
    g_vec: np.ndarray
    u_bc: Tuple[np.ndarray, np.ndarray]
    theta_bc: Tuple[np.ndarray, np.ndarray]
    boundary_flux: float = 0.0


def discretize(spaces: DiscreteSpaces, case: ManufacturedCase, config: SolverConfig) -> Discretization:
    V, Q, T = spaces.velocity, spaces.pressure, spaces.temperature
    B = assemble_b(V, Q)
    f_vec, g_vec = assemble_loads(case, V, T)
    u_idx, u_val = boundary_values(V, case.u)
    flux = 0.0
    if config.flux_correction:
        u_val, flux = flux_corrected_values(V, B, u_idx, u_val)
    return Discretization(
        spaces=spaces,
        B=B,
        m=zero_mean_constraint(Q),
        a2=assemble_a2(T, config.kappa),
        f_vec=f_vec,
        g_vec=g_vec,
        u_bc=(u_idx, u_val),
        theta_bc=boundary_values(T, case.theta),
        boundary_flux=flux,
    )


def _matrix_stats(system: SparseSystem) -> dict:
    return {"size": system.size, "nnz": system.matrix.nnz,
            "norm_inf": float(sparse_norm(system.matrix, np.inf))}


def saddle_solve(system: SparseSystem) -> np.ndarray:
    """Sparse LU solve with a backward-error check"""
    try:
        lu = splu(system.matrix.tocsc())
    except RuntimeError as e:
        raise SingularSystemError(f"sparse factorization failed: {e}", _matrix_stats(system)) from e
    x = lu.solve(system.rhs)
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("sparse solve produced non-finite values", _matrix_stats(system))

    residual = float(np.max(np.abs(system.matrix @ x - system.rhs), initial=0.0))
    scale = (float(sparse_norm(system.matrix, np.inf)) * float(np.max(np.abs(x), initial=0.0))
             + float(np.max(np.abs(system.rhs), initial=0.0)))
    if residual > RESIDUAL_TOLERANCE * scale:
        stats = _matrix_stats(system)
        stats["residual"] = residual
        raise SingularSystemError("sparse solve residual above tolerance", stats)
    return x


def _require_finite(**vectors: np.ndarray) -> None:
    for name, vec in vectors.items():
        if not np.all(np.isfinite(vec)):
            raise SingularSystemError(f"non-finite entries in {name}", {"count": int(np.sum(~np.isfinite(vec)))})


def stokes_step(theta_k: np.ndarray, u_k: np.ndarray, spaces: DiscreteSpaces, params: CarreauParams,
                viscosity: ViscosityModel, config: SolverConfig, case: ManufacturedCase,
                disc: Optional[Discretization] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Frozen-coefficient Stokes solve; returns (u_k+1, mean-free pi_k+1)"""
    _require_finite(theta_k=theta_k, u_k=u_k)
    disc = disc or discretize(spaces, case, config)
    V, T = spaces.velocity, spaces.temperature

    frozen = FrozenCoefficients(w=u_k, theta=theta_k, sigma=config.sigma, r_reg=config.r_reg)
    A = assemble_a1_frozen(frozen, V, T, viscosity, params)
    system = apply_dirichlet(saddle_system(A, disc.B, disc.m, disc.f_vec), *disc.u_bc)
    x = saddle_solve(system)

    u = system.block("u", x).copy()
    idx, values = disc.u_bc
    u[idx] = values
    pi = system.block("pi", x).copy()
    pi -= (disc.m @ pi) / np.sum(disc.m)

    residual = float(np.max(np.abs(disc.B @ u), initial=0.0))
    if residual > DIVERGENCE_TOLERANCE * max(float(np.max(np.abs(u), initial=0.0)), 1.0):
        if config.flux_correction:
            stats = _matrix_stats(system)
            stats["residual"] = residual
            raise SingularSystemError("discrete divergence residual above tolerance", stats)
        # uncorrected boundary data keeps its net flux
        logger.warning(f"Discrete divergence residual {residual:.3e} above tolerance")
    return u, pi


def temperature_step(u_next: np.ndarray, spaces: DiscreteSpaces, config: SolverConfig,
                     case: ManufacturedCase, disc: Optional[Discretization] = None) -> np.ndarray:
    """Solve (a2 + c_h(u)) theta = g with Dirichlet data"""
    _require_finite(u_next=u_next)
    disc = disc or discretize(spaces, case, config)
    T = spaces.temperature
    C = assemble_ch(u_next, spaces.velocity, T)
    system = SparseSystem(matrix=(disc.a2 + C).tocsr(), rhs=disc.g_vec.copy(),
                          blocks={"theta": (0, T.ndof)})
    system = apply_dirichlet(system, *disc.theta_bc)
    theta = saddle_solve(system)
    idx, values = disc.theta_bc
    theta[idx] = values
    return theta


def norm_exponents(params: CarreauParams, config: SolverConfig) -> Tuple[float, float, float]:
    """(s, s', diagnostic exponent (s-1) p2)"""
    s = 2.0 if params.eta_inf > 0 else params.p
    s_dual = s / (s - 1.0)
    p2 = config.diag_p2 if config.diag_p2 is not None else 2.0 * params.p / (s - 1.0)
    return s, s_dual, (s - 1.0) * p2


def zero_state(spaces: DiscreteSpaces) -> CoupledState:
    n_u, n_p, n_t = spaces.ndofs
    return CoupledState(np.zeros(n_u), np.zeros(n_p), np.zeros(n_t))


def transfer_state(state: CoupledState, source: DiscreteSpaces, target: DiscreteSpaces) -> CoupledState:
    """Evaluate a state on another mesh at the target's nodes"""
    V, Q, T = source.velocity, source.pressure, source.temperature

    def u(x, y):
        return V.evaluate_at(state.u, np.column_stack([x, y])).T

    def pi(x, y):
        return Q.evaluate_at(state.pi, np.column_stack([x, y]))

    def theta(x, y):
        return T.evaluate_at(state.theta, np.column_stack([x, y]))

    return CoupledState(target.velocity.interpolate(u),
                        target.pressure.interpolate(pi),
                        target.temperature.interpolate(theta))


def picard_solve(mesh: Mesh, spaces: DiscreteSpaces, params: CarreauParams, viscosity: ViscosityModel,
                 case: ManufacturedCase, config: SolverConfig,
                 initial: Optional[CoupledState] = None) -> Tuple[CoupledState, IterationLog]:
    """Fixed-point iteration from (0, 0) (or `initial`) until the increment drops below tol

    Raises:
        NonConvergenceError: after max_iter iterations; carries the last state and log
        DivergenceError: when increments keep growing
        SingularSystemError: when a linear solve fails
    """
    if spaces.mesh is not mesh:
        raise MeshMismatchError("spaces were not built on the given mesh")
    if config.kappa != case.kappa:
        raise ConfigurationError(f"solver kappa {config.kappa} differs from case kappa {case.kappa}")

    s, s_dual, diag = norm_exponents(params, config)
    log = IterationLog(s=s, s_dual=s_dual, diag_exponent=diag)
    disc = discretize(spaces, case, config)
    V, Q, T = spaces.velocity, spaces.pressure, spaces.temperature
    state = initial.copy() if initial is not None else zero_state(spaces)

    previous = math.inf
    growth = 0
    warned_range = False
    for k in range(1, config.max_iter + 1):
        u_next, pi_next = stokes_step(state.theta, state.u, spaces, params, viscosity, config, case, disc)
        convecting = u_next if config.convection_velocity == ConvectionVelocity.CURRENT else state.u
        theta_next = temperature_step(convecting, spaces, config, case, disc)
        new = CoupledState(u_next, pi_next, theta_next)

        record = IterationRecord(
            iteration=k,
            du=lp_norm(V.tab, vector_magnitude(V.values(new.u - state.u)), s),
            dpi=lp_norm(Q.tab, Q.values(new.pi - state.pi), s_dual),
            dtheta=lp_norm(T.tab, T.values(new.theta - state.theta), 2.0),
            eps_norm_diag=lp_norm(V.tab, strain_magnitude(V.strain(new.u)), diag),
            grad_theta_diag=lp_norm(T.tab, vector_magnitude(T.gradients(new.theta)), 2.0),
            theta_min=float(new.theta.min()),
            theta_max=float(new.theta.max()),
            div_residual=float(np.max(np.abs(disc.B @ new.u), initial=0.0)),
        )
        log.append(record)
        state = new
        logger.info("Picard iteration", extra={
            "iteration": k, "du": record.du, "dpi": record.dpi, "dtheta": record.dtheta,
            "eps_norm_diag": record.eps_norm_diag, "grad_theta_diag": record.grad_theta_diag,
            "theta_min": record.theta_min, "theta_max": record.theta_max,
            "div_residual": record.div_residual,
        })
        if not warned_range and not viscosity.contains(record.theta_min, record.theta_max):
            warned_range = True
            logger.warning(
                f"Temperature range [{record.theta_min:.4g}, {record.theta_max:.4g}] leaves the "
                f"viscosity validity interval {viscosity.interval}"
            )

        increment = record.increment
        if not math.isfinite(increment):
            raise DivergenceError(f"non-finite increment at iteration {k}", state, log)
        if increment < config.tol:
            log.converged = True
            logger.info(f"Picard converged in {k} iterations (increment {increment:.3e})")
            return state, log

        if increment > config.divergence_factor * previous:
            growth += 1
            if growth >= config.divergence_patience:
                raise DivergenceError(
                    f"increment grew by more than {config.divergence_factor:g}x in "
                    f"{growth} consecutive iterations", state, log)
        else:
            growth = 0
        previous = increment

    raise NonConvergenceError(
        f"Picard iteration did not reach tol={config.tol:g} in {config.max_iter} iterations "
        f"(last increment {log.records[-1].increment:.3e})", state, log)
