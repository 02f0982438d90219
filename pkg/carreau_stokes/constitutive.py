"""
constitutive: Carreau viscosity, temperature factor and stress

eta(z) = eta_inf + (eta0 - eta_inf) (1 + lambda z)^((p-2)/2) with z the squared
Frobenius norm of the symmetric strain; stress(eps) = eta(|eps|^2) eps.
Includes evaluators for the monotonicity, Lipschitz and growth inequalities
of the law, both pointwise and as a sampled property report.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple, Union

import numpy as np

from .stokes_types import ConstitutiveError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class CarreauParams:
    """Carreau constants: 0 <= eta_inf < eta0, lambda > 0, 1 < p <= 2"""
    eta_inf: float = 0.5
    eta0: float = 2.0
    lam: float = 1.0
    p: float = 1.6

    def __post_init__(self):
        values = (self.eta_inf, self.eta0, self.lam, self.p)
        if not all(math.isfinite(v) for v in values):
            raise ConstitutiveError(f"Carreau parameters must be finite, got {values}")
        if self.eta_inf < 0:
            raise ConstitutiveError(f"eta_inf must be >= 0, got {self.eta_inf}")
        if not self.eta0 > self.eta_inf:
            raise ConstitutiveError(f"eta0 must exceed eta_inf, got eta0={self.eta0}, eta_inf={self.eta_inf}")
        if self.lam <= 0:
            raise ConstitutiveError(f"lambda must be > 0, got {self.lam}")
        if not 1.0 < self.p <= 2.0:
            raise ConstitutiveError(f"p must lie in (1, 2], got {self.p}")

    @property
    def newtonian(self) -> bool:
        return self.p == 2.0

    @property
    def degenerate(self) -> bool:
        """True when eta_inf = 0, i.e. the law has no linear lower bound"""
        return self.eta_inf == 0.0


class ViscosityKind(str, Enum):
    EXP_DECAY = "exp_decay"
    CONSTANT = "constant"
    AFFINE_CLAMPED = "affine_clamped"


@dataclass(frozen=True)
class ViscosityModel:
    """Temperature factor nu(theta) from a closed registry of forms

    The bounds nu1 <= nu <= nu2 and |nu'| <= nu3 are reported on `interval`.
    """
    kind: ViscosityKind
    c: float = 1.0
    a: float = 1.0
    b: float = 0.0
    lo: float = 1.0
    hi: float = 1.0
    interval: Tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", ViscosityKind(self.kind))
        except ValueError as e:
            raise ConstitutiveError(f"Unknown viscosity model kind {self.kind!r}") from e
        t0, t1 = self.interval
        if not t0 <= t1:
            raise ConstitutiveError(f"Viscosity validity interval must be ordered, got {self.interval}")
        if self.kind == ViscosityKind.CONSTANT and self.c <= 0:
            raise ConstitutiveError(f"constant viscosity must be positive, got {self.c}")
        if self.kind == ViscosityKind.AFFINE_CLAMPED and not 0 < self.lo <= self.hi:
            raise ConstitutiveError(f"affine_clamped needs 0 < lo <= hi, got lo={self.lo}, hi={self.hi}")

    @classmethod
    def exp_decay(cls, interval: Tuple[float, float] = (0.0, 1.5)) -> "ViscosityModel":
        return cls(ViscosityKind.EXP_DECAY, interval=tuple(interval))

    @classmethod
    def constant(cls, c: float, interval: Tuple[float, float] = (0.0, 1.0)) -> "ViscosityModel":
        return cls(ViscosityKind.CONSTANT, c=c, interval=tuple(interval))

    @classmethod
    def affine_clamped(cls, a: float, b: float, lo: float, hi: float,
                       interval: Tuple[float, float] = (0.0, 1.0)) -> "ViscosityModel":
        return cls(ViscosityKind.AFFINE_CLAMPED, a=a, b=b, lo=lo, hi=hi, interval=tuple(interval))

    def bounds(self) -> Tuple[float, float, float]:
        """(nu1, nu2, nu3) on the validity interval"""
        t0, t1 = self.interval
        if self.kind == ViscosityKind.EXP_DECAY:
            return math.exp(-t1), math.exp(-t0), math.exp(-t0)
        if self.kind == ViscosityKind.CONSTANT:
            return self.c, self.c, 0.0
        ends = np.clip([self.a + self.b * t0, self.a + self.b * t1], self.lo, self.hi)
        return float(ends.min()), float(ends.max()), abs(self.b)

    def contains(self, theta_min: float, theta_max: float) -> bool:
        t0, t1 = self.interval
        return t0 <= theta_min and theta_max <= t1


def nu(theta: ArrayLike, model: ViscosityModel) -> ArrayLike:
    theta = np.asarray(theta, dtype=float)
    if model.kind == ViscosityKind.EXP_DECAY:
        out = np.exp(-theta)
    elif model.kind == ViscosityKind.CONSTANT:
        out = np.full_like(theta, model.c)
    elif model.kind == ViscosityKind.AFFINE_CLAMPED:
        out = np.clip(model.a + model.b * theta, model.lo, model.hi)
    else:
        raise ConstitutiveError(f"Unknown viscosity model kind {model.kind!r}")
    return _scalar_or_array(out)


def nu_prime(theta: ArrayLike, model: ViscosityModel) -> ArrayLike:
    theta = np.asarray(theta, dtype=float)
    if model.kind == ViscosityKind.EXP_DECAY:
        out = -np.exp(-theta)
    elif model.kind == ViscosityKind.CONSTANT:
        out = np.zeros_like(theta)
    elif model.kind == ViscosityKind.AFFINE_CLAMPED:
        raw = model.a + model.b * theta
        out = np.where((raw > model.lo) & (raw < model.hi), model.b, 0.0)
    else:
        raise ConstitutiveError(f"Unknown viscosity model kind {model.kind!r}")
    return _scalar_or_array(out)


def _scalar_or_array(values: np.ndarray) -> ArrayLike:
    return float(values) if values.ndim == 0 else values


def eta(z: ArrayLike, params: CarreauParams) -> ArrayLike:
    """Carreau viscosity at squared strain-rate norm z >= 0"""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or np.any(np.isnan(z)):
        raise ConstitutiveError("eta is defined for z >= 0 only")
    if params.newtonian:
        return _scalar_or_array(np.full_like(z, params.eta0))
    exponent = 0.5 * (params.p - 2.0)
    values = params.eta_inf + (params.eta0 - params.eta_inf) * (1.0 + params.lam * z) ** exponent
    return _scalar_or_array(values)


def eta_prime(z: ArrayLike, params: CarreauParams) -> ArrayLike:
    """dEta/dz"""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ConstitutiveError("eta_prime is defined for z >= 0 only")
    if params.newtonian:
        return _scalar_or_array(np.zeros_like(z))
    exponent = 0.5 * (params.p - 2.0)
    values = (params.eta0 - params.eta_inf) * exponent * params.lam * (1.0 + params.lam * z) ** (exponent - 1.0)
    return _scalar_or_array(values)


@dataclass(frozen=True)
class SymTensor2:
    """Symmetric 2x2 tensor stored as (xx, xy, yy)"""
    xx: float
    xy: float
    yy: float

    @classmethod
    def from_matrix(cls, m) -> "SymTensor2":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), 0.5 * float(m[0, 1] + m[1, 0]), float(m[1, 1]))

    @classmethod
    def identity(cls) -> "SymTensor2":
        return cls(1.0, 0.0, 1.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.xx, self.xy, self.yy])

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.xx, self.xy], [self.xy, self.yy]])

    def inner(self, other: "SymTensor2") -> float:
        return self.xx * other.xx + 2.0 * self.xy * other.xy + self.yy * other.yy

    def norm(self) -> float:
        return math.sqrt(self.inner(self))

    def scale(self, factor: float) -> "SymTensor2":
        return SymTensor2(factor * self.xx, factor * self.xy, factor * self.yy)

    def __add__(self, other: "SymTensor2") -> "SymTensor2":
        return SymTensor2(self.xx + other.xx, self.xy + other.xy, self.yy + other.yy)

    def __sub__(self, other: "SymTensor2") -> "SymTensor2":
        return SymTensor2(self.xx - other.xx, self.xy - other.xy, self.yy - other.yy)

    def __neg__(self) -> "SymTensor2":
        return self.scale(-1.0)


# Vectorised kernels on arrays of shape (..., 3) holding (xx, xy, yy)


def frobenius_sq(t: np.ndarray) -> np.ndarray:
    return t[..., 0] ** 2 + 2.0 * t[..., 1] ** 2 + t[..., 2] ** 2


def frobenius_inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., 0] * b[..., 0] + 2.0 * a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def stress_array(eps: np.ndarray, params: CarreauParams) -> np.ndarray:
    return np.asarray(eta(frobenius_sq(eps), params))[..., None] * eps


def pairing_array(k: np.ndarray, l: np.ndarray, params: CarreauParams) -> np.ndarray:
    return frobenius_inner(stress_array(k, params) - stress_array(l, params), k - l)


def lipschitz_array(k: np.ndarray, l: np.ndarray, params: CarreauParams) -> np.ndarray:
    diff = np.sqrt(frobenius_sq(k - l))
    if np.any(diff == 0.0):
        raise ConstitutiveError("lipschitz_ratio is undefined for K = L")
    num = np.sqrt(frobenius_sq(stress_array(k, params) - stress_array(l, params)))
    if params.degenerate:
        return num / diff ** (params.p - 1.0)
    return num / diff


def growth_array(eps: np.ndarray, params: CarreauParams) -> np.ndarray:
    norm = np.sqrt(frobenius_sq(eps))
    return np.sqrt(frobenius_sq(stress_array(eps, params))) / (1.0 + norm) ** (params.p - 1.0)


def stress(eps: SymTensor2, params: CarreauParams) -> SymTensor2:
    return eps.scale(eta(eps.inner(eps), params))


def monotonicity_pairing(k: SymTensor2, l: SymTensor2, params: CarreauParams) -> float:
    """(tau(K) - tau(L)) : (K - L)"""
    return (stress(k, params) - stress(l, params)).inner(k - l)


def lipschitz_ratio(k: SymTensor2, l: SymTensor2, params: CarreauParams) -> float:
    """|tau(K) - tau(L)| / |K - L|, or / |K - L|^(p-1) when eta_inf = 0"""
    return float(lipschitz_array(k.as_array(), l.as_array(), params))


def growth_ratio(eps: SymTensor2, params: CarreauParams) -> float:
    """|tau(eps)| / (1 + |eps|)^(p-1)"""
    return float(growth_array(eps.as_array(), params))


@dataclass
class PropertyReport:
    """Empirical constants of the constitutive inequalities over random pairs"""
    params: CarreauParams
    samples: int
    seed: int
    min_pairing: float
    min_lower_bound_margin: float
    lower_bound_holds: bool
    eta_monotone: bool
    eta_in_range: bool
    lipschitz_sup: float
    growth_sup: float
    newtonian_deviation: Optional[float] = None
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def lipschitz_label(self) -> str:
        return "C3_hat" if self.params.degenerate else "C1_hat"


def _random_sym(rng: np.random.Generator, n: int, spread: float) -> np.ndarray:
    return rng.uniform(-spread, spread, size=(n, 3))


def check_constitutive(params: CarreauParams, samples: int = 100_000, seed: int = 0,
                       spread: float = 10.0) -> PropertyReport:
    """Sample the Carreau inequalities over `samples` random symmetric pairs

    Asserts positivity of the monotonicity pairing, the eta_inf lower bound,
    boundedness of the Lipschitz and growth ratios, and monotonicity of eta
    on a z-grid, and records the empirical suprema.
    """
    if samples < 1:
        raise ConstitutiveError(f"samples must be >= 1, got {samples}")
    rng = np.random.default_rng(seed)
    k = _random_sym(rng, samples, spread)
    l = _random_sym(rng, samples, spread)
    failures = []

    pairing = pairing_array(k, l, params)
    diff_sq = frobenius_sq(k - l)
    if not np.all(pairing > 0):
        failures.append(f"monotonicity pairing non-positive for {int(np.sum(pairing <= 0))} pairs")

    bound = params.eta_inf * diff_sq
    margin = pairing - bound * (1.0 - 1e-12)
    lower_ok = bool(np.all(margin >= 0))
    if not lower_ok:
        failures.append("pairing fell below eta_inf |K-L|^2")

    ratios = lipschitz_array(k, l, params)
    lipschitz_sup = float(np.max(ratios))
    if not math.isfinite(lipschitz_sup):
        failures.append("Lipschitz ratio is unbounded")

    growth = growth_array(k, params)
    growth_sup = float(np.max(growth))
    if not math.isfinite(growth_sup):
        failures.append("growth ratio is unbounded")

    z_grid = np.concatenate([[0.0], np.logspace(-6, 6, 241)])
    values = np.asarray(eta(z_grid, params))
    monotone = bool(np.all(np.diff(values) <= 0.0))
    in_range = bool(np.all((values >= params.eta_inf) & (values <= params.eta0)))
    if not monotone:
        failures.append("eta is not non-increasing on the z-grid")
    if not in_range:
        failures.append("eta left [eta_inf, eta0] on the z-grid")

    newtonian_deviation = None
    if params.newtonian:
        newtonian_deviation = float(np.max(np.abs(ratios - params.eta0)))
        if newtonian_deviation > 1e-12:
            failures.append(f"p=2 Lipschitz ratio deviates from eta0 by {newtonian_deviation:.3e}")

    report = PropertyReport(
        params=params,
        samples=samples,
        seed=seed,
        min_pairing=float(np.min(pairing)),
        min_lower_bound_margin=float(np.min(margin)),
        lower_bound_holds=lower_ok,
        eta_monotone=monotone,
        eta_in_range=in_range,
        lipschitz_sup=lipschitz_sup,
        growth_sup=growth_sup,
        newtonian_deviation=newtonian_deviation,
        failures=failures,
    )
    logger.info(
        "Constitutive check finished",
        extra={"samples": samples, "seed": seed, "p": params.p, "eta_inf": params.eta_inf,
               "lipschitz_sup": lipschitz_sup, "growth_sup": growth_sup,
               "passed": report.passed},
    )
    return report
