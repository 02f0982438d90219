"""
manufactured: exact solutions, derived forcings and error norms

Each registered case carries closed-form (u, pi, theta) with first and second
derivatives. The momentum forcing

    f = -div(2 nu(theta) eta(|eps(u)|^2) eps(u)) + grad pi

and the heat source g = -kappa lap(theta) + u . grad(theta) are expanded by
the chain rule from those derivatives, so no symbolic machinery is needed.
`validate_forcing` checks both against central finite differences.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from .constitutive import CarreauParams, ViscosityModel, eta, eta_prime, nu, nu_prime
from .fe_basis import MAX_EXACTNESS, quadrature
from .fe_space import (DiscreteSpaces, integrate, lp_norm, matrix_magnitude,
                       strain_magnitude, vector_magnitude)
from .stokes_types import (CaseId, ConfigurationError, CoupledState, ErrorReport,
                           MeshMismatchError, ReportError)

logger = logging.getLogger(__name__)

FD_STEP_F = 1e-5
FD_STEP_G = 1e-4
FORCING_TOLERANCE = 1e-5


class ExactFields(ABC):
    """Closed-form velocity, pressure and temperature with derivatives

    Array-valued: for inputs of shape S, vectors have shape (2, *S),
    gradients of u (2, 2, *S) with [i, j] = d_j u_i and Hessians
    (2, 2, 2, *S) with [i, j, k] = d_j d_k u_i.
    """

    @abstractmethod
    def u(self, x, y) -> np.ndarray: ...

    @abstractmethod
    def grad_u(self, x, y) -> np.ndarray: ...

    @abstractmethod
    def hess_u(self, x, y) -> np.ndarray: ...

    @abstractmethod
    def pi(self, x, y) -> np.ndarray: ...

    @abstractmethod
    def grad_pi(self, x, y) -> np.ndarray: ...

    @abstractmethod
    def theta(self, x, y) -> np.ndarray: ...

    @abstractmethod
    def grad_theta(self, x, y) -> np.ndarray: ...

    @abstractmethod
    def lap_theta(self, x, y) -> np.ndarray: ...


class SwirlFields(ExactFields):
    """u = (5y S+ + 4y S-, -5x S+ + 4x S-), pi = sin(x+y), theta = cos(xy)

    with S+ = sin(x^2+y^2), S- = sin(x^2-y^2).
    """

    @staticmethod
    def _trig(x, y):
        r, d = x * x + y * y, x * x - y * y
        return np.sin(r), np.cos(r), np.sin(d), np.cos(d)

    def u(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        sr, _, sd, _ = self._trig(x, y)
        return np.stack([5 * y * sr + 4 * y * sd, -5 * x * sr + 4 * x * sd])

    def grad_u(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        sr, cr, sd, cd = self._trig(x, y)
        xy = x * y
        dxux = 10 * xy * cr + 8 * xy * cd
        dyux = 5 * sr + 10 * y * y * cr + 4 * sd - 8 * y * y * cd
        dxuy = -5 * sr - 10 * x * x * cr + 4 * sd + 8 * x * x * cd
        dyuy = -10 * xy * cr - 8 * xy * cd
        return np.stack([np.stack([dxux, dyux]), np.stack([dxuy, dyuy])])

    def hess_u(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        sr, cr, sd, cd = self._trig(x, y)
        x2, y2 = x * x, y * y
        uxx = 10 * y * cr - 20 * x2 * y * sr + 8 * y * cd - 16 * x2 * y * sd
        uxy = 10 * x * cr - 20 * x * y2 * sr + 8 * x * cd + 16 * x * y2 * sd
        uyy = 30 * y * cr - 20 * y2 * y * sr - 24 * y * cd - 16 * y2 * y * sd
        vxx = -30 * x * cr + 20 * x2 * x * sr + 24 * x * cd - 16 * x2 * x * sd
        vxy = -10 * y * cr + 20 * x2 * y * sr - 8 * y * cd + 16 * x2 * y * sd
        vyy = -10 * x * cr + 20 * x * y2 * sr - 8 * x * cd - 16 * x * y2 * sd
        hx = np.stack([np.stack([uxx, uxy]), np.stack([uxy, uyy])])
        hy = np.stack([np.stack([vxx, vxy]), np.stack([vxy, vyy])])
        return np.stack([hx, hy])

    def pi(self, x, y):
        return np.sin(np.asarray(x, float) + np.asarray(y, float))

    def grad_pi(self, x, y):
        c = np.cos(np.asarray(x, float) + np.asarray(y, float))
        return np.stack([c, c])

    def theta(self, x, y):
        return np.cos(np.asarray(x, float) * np.asarray(y, float))

    def grad_theta(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        s = np.sin(x * y)
        return np.stack([-y * s, -x * s])

    def lap_theta(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        return -(x * x + y * y) * np.cos(x * y)

    def stream_function(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        return -2.5 * np.cos(x * x + y * y) + 2.0 * np.cos(x * x - y * y)


class RigidRotationFields(ExactFields):
    """u = (y, -x), pi = x + y - 1, theta = x + y; all exactly representable"""

    def u(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        return np.stack([y, -x])

    def grad_u(self, x, y):
        x = np.asarray(x, float) + 0.0 * np.asarray(y, float)
        zero, one = np.zeros_like(x), np.ones_like(x)
        return np.stack([np.stack([zero, one]), np.stack([-one, zero])])

    def hess_u(self, x, y):
        x = np.asarray(x, float) + 0.0 * np.asarray(y, float)
        return np.zeros((2, 2, 2) + x.shape)

    def pi(self, x, y):
        return np.asarray(x, float) + np.asarray(y, float) - 1.0

    def grad_pi(self, x, y):
        one = np.ones_like(np.asarray(x, float) + 0.0 * np.asarray(y, float))
        return np.stack([one, one])

    def theta(self, x, y):
        return np.asarray(x, float) + np.asarray(y, float)

    def grad_theta(self, x, y):
        return self.grad_pi(x, y)

    def lap_theta(self, x, y):
        return np.zeros_like(np.asarray(x, float) + 0.0 * np.asarray(y, float))


class HeatOnlyFields(ExactFields):
    """u = 0, pi = 0, theta = sin(pi x) sin(pi y)"""

    @staticmethod
    def _zeros(x, y):
        return np.zeros_like(np.asarray(x, float) + 0.0 * np.asarray(y, float))

    def u(self, x, y):
        z = self._zeros(x, y)
        return np.stack([z, z])

    def grad_u(self, x, y):
        z = self._zeros(x, y)
        return np.zeros((2, 2) + z.shape)

    def hess_u(self, x, y):
        z = self._zeros(x, y)
        return np.zeros((2, 2, 2) + z.shape)

    def pi(self, x, y):
        return self._zeros(x, y)

    def grad_pi(self, x, y):
        return self.u(x, y)

    def theta(self, x, y):
        return np.sin(math.pi * np.asarray(x, float)) * np.sin(math.pi * np.asarray(y, float))

    def grad_theta(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        return math.pi * np.stack([np.cos(math.pi * x) * np.sin(math.pi * y),
                                   np.sin(math.pi * x) * np.cos(math.pi * y)])

    def lap_theta(self, x, y):
        return -2.0 * math.pi ** 2 * self.theta(x, y)


@dataclass(frozen=True, eq=False)
class ManufacturedCase:
    """Exact fields plus the material data their forcings were derived for"""
    case_id: CaseId
    fields: ExactFields
    params: CarreauParams
    viscosity: ViscosityModel
    kappa: float = 1.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ConfigurationError(f"kappa must be > 0, got {self.kappa}")

    @property
    def name(self) -> str:
        return self.case_id.value

    @property
    def s(self) -> float:
        """Velocity norm exponent: 2 when eta_inf > 0, else p"""
        return 2.0 if self.params.eta_inf > 0 else self.params.p

    @property
    def s_dual(self) -> float:
        return self.s / (self.s - 1.0)

    def u(self, x, y):
        return self.fields.u(x, y)

    def pi(self, x, y):
        return self.fields.pi(x, y)

    def theta(self, x, y):
        return self.fields.theta(x, y)

    def stress(self, x, y) -> np.ndarray:
        """2 nu(theta) eta(|eps(u)|^2) eps(u), shape (2, 2, *S)"""
        j = self.fields.grad_u(x, y)
        eps = 0.5 * (j + j.swapaxes(0, 1))
        z = np.sum(eps ** 2, axis=(0, 1))
        mu = 2.0 * nu(self.fields.theta(x, y), self.viscosity) * eta(z, self.params)
        return mu * eps

    def f(self, x, y) -> np.ndarray:
        fields = self.fields
        j, h = fields.grad_u(x, y), fields.hess_u(x, y)
        eps = 0.5 * (j + j.swapaxes(0, 1))
        deps = 0.5 * (h + h.swapaxes(0, 1))
        z = np.sum(eps ** 2, axis=(0, 1))
        dz = 2.0 * np.einsum("kl...,klj...->j...", eps, deps)

        theta = fields.theta(x, y)
        nu_v = nu(theta, self.viscosity)
        eta_v = eta(z, self.params)
        mu = 2.0 * nu_v * eta_v
        dmu = (2.0 * nu_prime(theta, self.viscosity) * eta_v * fields.grad_theta(x, y)
               + 2.0 * nu_v * eta_prime(z, self.params) * dz)
        div = mu * np.einsum("ijj...->i...", deps) + np.einsum("ij...,j...->i...", eps, dmu)
        return -div + fields.grad_pi(x, y)

    def g(self, x, y) -> np.ndarray:
        fields = self.fields
        advection = np.sum(fields.u(x, y) * fields.grad_theta(x, y), axis=0)
        return -self.kappa * fields.lap_theta(x, y) + advection


# Registry


def test1_case(p: float = 1.6, eta_inf: float = 0.5, eta0: float = 2.0, lam: float = 1.0,
               kappa: float = 1.0) -> ManufacturedCase:
    return ManufacturedCase(CaseId.TEST1, SwirlFields(), CarreauParams(eta_inf, eta0, lam, p),
                            ViscosityModel.exp_decay(), kappa)


def test2_case(p: float = 1.6, eta_inf: float = 0.0, eta0: float = 2.0, lam: float = 1.0,
               kappa: float = 1.0) -> ManufacturedCase:
    return ManufacturedCase(CaseId.TEST2, SwirlFields(), CarreauParams(eta_inf, eta0, lam, p),
                            ViscosityModel.exp_decay(), kappa)


def stokes_linear_case(p: float = 2.0, eta_inf: float = 0.5, eta0: float = 2.0, lam: float = 1.0,
                       kappa: float = 1.0) -> ManufacturedCase:
    return ManufacturedCase(CaseId.STOKES_LINEAR, RigidRotationFields(),
                            CarreauParams(eta_inf, eta0, lam, p),
                            ViscosityModel.constant(1.0, interval=(0.0, 2.0)), kappa)


def heat_only_case(p: float = 1.6, eta_inf: float = 0.5, eta0: float = 2.0, lam: float = 1.0,
                   kappa: float = 1.0) -> ManufacturedCase:
    return ManufacturedCase(CaseId.HEAT_ONLY, HeatOnlyFields(), CarreauParams(eta_inf, eta0, lam, p),
                            ViscosityModel.constant(1.0, interval=(0.0, 1.0)), kappa)


CASES: Dict[CaseId, Callable[..., ManufacturedCase]] = {
    CaseId.TEST1: test1_case,
    CaseId.TEST2: test2_case,
    CaseId.STOKES_LINEAR: stokes_linear_case,
    CaseId.HEAT_ONLY: heat_only_case,
}

DEFAULT_ETA_INF: Dict[CaseId, float] = {
    CaseId.TEST1: 0.5,
    CaseId.TEST2: 0.0,
    CaseId.STOKES_LINEAR: 0.5,
    CaseId.HEAT_ONLY: 0.5,
}


def make_case(case_id: Union[CaseId, str], p: float, eta_inf: Optional[float] = None,
              eta0: float = 2.0, lam: float = 1.0, kappa: float = 1.0) -> ManufacturedCase:
    try:
        case_id = CaseId(case_id)
    except ValueError as e:
        raise ConfigurationError(f"Unknown case {case_id!r}; expected one of "
                                 f"{[c.value for c in CaseId]}") from e
    if eta_inf is None:
        eta_inf = DEFAULT_ETA_INF[case_id]
    return CASES[case_id](p=p, eta_inf=eta_inf, eta0=eta0, lam=lam, kappa=kappa)


def forcing_f(point, case: ManufacturedCase) -> np.ndarray:
    x, y = np.asarray(point, dtype=float).reshape(2)
    return case.f(x, y)


def forcing_g(point, case: ManufacturedCase) -> float:
    x, y = np.asarray(point, dtype=float).reshape(2)
    return float(case.g(x, y))


# Finite-difference oracle


@dataclass
class ForcingValidation:
    """Maximum relative deviation of closed-form forcings from central differences"""
    case: str
    samples: int
    seed: int
    max_rel_f: float
    max_rel_g: float
    tolerance: float = FORCING_TOLERANCE

    @property
    def max_deviation(self) -> float:
        return max(self.max_rel_f, self.max_rel_g)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def fd_forcing_f(case: ManufacturedCase, x: np.ndarray, y: np.ndarray, h: float = FD_STEP_F) -> np.ndarray:
    """-div of the stress and grad pi by second-order central differences"""
    sx = (case.stress(x + h, y) - case.stress(x - h, y)) / (2 * h)
    sy = (case.stress(x, y + h) - case.stress(x, y - h)) / (2 * h)
    div = sx[:, 0] + sy[:, 1]
    grad_pi = np.stack([(case.pi(x + h, y) - case.pi(x - h, y)) / (2 * h),
                        (case.pi(x, y + h) - case.pi(x, y - h)) / (2 * h)])
    return -div + grad_pi


def fd_forcing_g(case: ManufacturedCase, x: np.ndarray, y: np.ndarray, h: float = FD_STEP_G) -> np.ndarray:
    t = case.theta
    centre = t(x, y)
    lap = (t(x + h, y) + t(x - h, y) + t(x, y + h) + t(x, y - h) - 4.0 * centre) / (h * h)
    grad = np.stack([(t(x + h, y) - t(x - h, y)) / (2 * h), (t(x, y + h) - t(x, y - h)) / (2 * h)])
    return -case.kappa * lap + np.sum(case.u(x, y) * grad, axis=0)


def validate_forcing(case: ManufacturedCase, samples: int = 1000, seed: int = 0) -> ForcingValidation:
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.01, 0.99, size=(samples, 2))
    x, y = pts[:, 0], pts[:, 1]

    f_closed, f_fd = case.f(x, y), fd_forcing_f(case, x, y)
    rel_f = np.abs(f_closed - f_fd) / np.maximum(np.abs(f_closed), 1.0)
    g_closed, g_fd = case.g(x, y), fd_forcing_g(case, x, y)
    rel_g = np.abs(g_closed - g_fd) / np.maximum(np.abs(g_closed), 1.0)

    result = ForcingValidation(case=case.name, samples=samples, seed=seed,
                               max_rel_f=float(rel_f.max()), max_rel_g=float(rel_g.max()))
    log = logger.info if result.passed else logger.warning
    log("Forcing validation finished",
        extra={"case": case.name, "samples": samples, "max_rel_f": result.max_rel_f,
               "max_rel_g": result.max_rel_g, "passed": result.passed})
    return result


# Error norms


def interpolate_exact(spaces: DiscreteSpaces, case: ManufacturedCase) -> CoupledState:
    """Nodal interpolants of the exact fields, pressure shifted to zero mean"""
    pressure = spaces.pressure
    pi = pressure.interpolate(case.pi)
    area = integrate(pressure.tab, np.ones_like(pressure.tab.wdet))
    mean = integrate(pressure.tab, pressure.values(pi)) / area
    return CoupledState(u=spaces.velocity.interpolate(case.u),
                        pi=pi - mean,
                        theta=spaces.temperature.interpolate(case.theta))


def error_norms(state: CoupledState, spaces: DiscreteSpaces, case: ManufacturedCase,
                quadrature_boost: int = 4) -> ErrorReport:
    """Errors of `state` against the exact fields by boosted elementwise quadrature"""
    V, Q, T = spaces.velocity, spaces.pressure, spaces.temperature
    for name, vec, space in (("u", state.u, V), ("pi", state.pi, Q), ("theta", state.theta, T)):
        if np.shape(vec) != (space.ndof,):
            raise MeshMismatchError(f"{name} has shape {np.shape(vec)}, space expects ({space.ndof},)")

    exactness = V.rule.degree + quadrature_boost
    if exactness > MAX_EXACTNESS:
        logger.warning(f"Error quadrature exactness {exactness} capped at {MAX_EXACTNESS}")
        exactness = MAX_EXACTNESS
    rule = quadrature(exactness)
    tab_v, tab_q, tab_t = V.tabulate(rule), Q.tabulate(rule), T.tabulate(rule)
    x, y = tab_v.points[..., 0], tab_v.points[..., 1]
    s, s_dual = case.s, case.s_dual

    u_err = np.moveaxis(case.u(x, y), 0, -1) - V.values(state.u, tab_v)
    grad_err = np.moveaxis(case.fields.grad_u(x, y), (0, 1), (-2, -1)) - V.gradients(state.u, tab_v)
    strain_err = np.stack([grad_err[..., 0, 0],
                           0.5 * (grad_err[..., 0, 1] + grad_err[..., 1, 0]),
                           grad_err[..., 1, 1]], axis=-1)

    area = integrate(tab_q, np.ones_like(x))
    pi_exact = case.pi(x, y)
    pi_h = Q.values(state.pi, tab_q)
    pi_err = (pi_exact - integrate(tab_q, pi_exact) / area) - (pi_h - integrate(tab_q, pi_h) / area)

    theta_grad_err = np.moveaxis(case.fields.grad_theta(x, y), 0, -1) - T.gradients(state.theta, tab_t)

    return ErrorReport(
        err_u_l2=lp_norm(tab_v, vector_magnitude(u_err), 2.0),
        err_u_w1s=lp_norm(tab_v, strain_magnitude(strain_err), s),
        err_pi=lp_norm(tab_q, pi_err, s_dual),
        err_theta_h1=lp_norm(tab_t, vector_magnitude(theta_grad_err), 2.0),
        err_u_h1=lp_norm(tab_v, matrix_magnitude(grad_err), 2.0),
        err_u_grad_ls=lp_norm(tab_v, matrix_magnitude(grad_err), s),
        s=s,
        quadrature_exactness=exactness,
    )


def eoc(errors: Sequence[float], hs: Sequence[float]) -> List[float]:
    """Orders log(e_k / e_k+1) / log(h_k / h_k+1) between consecutive levels"""
    errors = np.asarray(errors, dtype=float)
    hs = np.asarray(hs, dtype=float)
    if errors.shape != hs.shape or errors.ndim != 1 or len(errors) < 2:
        raise ReportError("eoc needs two equally long sequences with at least two entries")
    if np.any(errors <= 0) or np.any(hs <= 0):
        raise ReportError("eoc needs strictly positive errors and mesh sizes")
    if np.any(np.diff(hs) >= 0):
        raise ReportError("mesh sizes must be strictly decreasing")
    return list(np.log(errors[:-1] / errors[1:]) / np.log(hs[:-1] / hs[1:]))
