"""
assembly: sparse matrices and load vectors of the Picard subproblems

Element contributions are computed for all cells at once and accumulated in
element order through COO -> CSR conversion, which sums duplicates
deterministically.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .constitutive import CarreauParams, ViscosityModel, eta, frobenius_sq, nu
from .fe_space import FeSpace, Tabulation, check_compatible
from .stokes_types import ConfigurationError, ConstitutiveError, format_number

logger = logging.getLogger(__name__)

BoundaryRule = Union[Callable[[np.ndarray, np.ndarray], np.ndarray], np.ndarray, float]


@dataclass
class SparseSystem:
    """Square CSR matrix, right-hand side and block layout"""
    matrix: sp.csr_matrix
    rhs: np.ndarray
    blocks: Dict[str, Tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self):
        n, m = self.matrix.shape
        if n != m or self.rhs.shape != (n,):
            raise ConfigurationError(
                f"inconsistent system: matrix {self.matrix.shape}, rhs {self.rhs.shape}"
            )

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def block(self, name: str, x: np.ndarray) -> np.ndarray:
        start, stop = self.blocks[name]
        return x[start:stop]


@dataclass(frozen=True, eq=False)
class FrozenCoefficients:
    """Previous Picard iterate frozen into the momentum coefficient

    `lift` evaluates a temperature offset at physical points; it stays None
    when the temperature coefficients already carry their boundary values.
    """
    w: np.ndarray
    theta: np.ndarray
    sigma: float = 0.0
    r_reg: float = 2.0
    lift: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.sigma < 0:
            raise ConstitutiveError(f"sigma must be >= 0, got {self.sigma}")
        if self.r_reg < 2:
            raise ConstitutiveError(f"r_reg must be >= 2, got {self.r_reg}")


def _to_csr(rows: np.ndarray, cols: np.ndarray, data: np.ndarray, shape: Tuple[int, int]) -> sp.csr_matrix:
    matrix = sp.coo_matrix((data.ravel(), (rows.ravel(), cols.ravel())), shape=shape).tocsr()
    matrix.sum_duplicates()
    return matrix


def _block_indices(row_dofs: np.ndarray, col_dofs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    rows = np.broadcast_to(row_dofs[:, :, None], (row_dofs.shape[0], row_dofs.shape[1], col_dofs.shape[1]))
    cols = np.broadcast_to(col_dofs[:, None, :], rows.shape)
    return rows, cols


def _weighted_gradient_products(tab: Tabulation, coefficient: np.ndarray) -> np.ndarray:
    """P[e, d, f, i, j] = integral c d_d(phi_i) d_f(phi_j)"""
    return np.einsum("eq,eqid,eqjf->edfij", tab.wdet * coefficient, tab.grads, tab.grads)


def _strain_element_matrices(tab: Tabulation, coefficient: np.ndarray) -> np.ndarray:
    """Element blocks of integral c eps(phi_j e_b) : eps(phi_i e_a), shape (e, a, b, i, j)"""
    p = _weighted_gradient_products(tab, coefficient)
    k = np.empty((p.shape[0], 2, 2, p.shape[3], p.shape[4]))
    k[:, 0, 0] = p[:, 0, 0] + 0.5 * p[:, 1, 1]
    k[:, 0, 1] = 0.5 * p[:, 1, 0]
    k[:, 1, 0] = 0.5 * p[:, 0, 1]
    k[:, 1, 1] = 0.5 * p[:, 0, 0] + p[:, 1, 1]
    return k


def _assemble_vector_block(space: FeSpace, element: np.ndarray) -> sp.csr_matrix:
    rows, cols, data = [], [], []
    for a in range(2):
        for b in range(2):
            r, c = _block_indices(space.component_cell_dofs(a), space.component_cell_dofs(b))
            rows.append(r)
            cols.append(c)
            data.append(element[:, a, b])
    return _to_csr(np.concatenate([r.ravel() for r in rows]),
                   np.concatenate([c.ravel() for c in cols]),
                   np.concatenate([d.ravel() for d in data]),
                   (space.ndof, space.ndof))


def assemble_strain_stiffness(V: FeSpace, coefficient: Optional[np.ndarray] = None) -> sp.csr_matrix:
    """integral c eps(phi_j) : eps(phi_i); c defaults to 1 (the Korn energy)"""
    if coefficient is None:
        coefficient = np.ones_like(V.tab.wdet)
    return _assemble_vector_block(V, _strain_element_matrices(V.tab, coefficient))


def momentum_coefficient(frozen: FrozenCoefficients, V: FeSpace, T: FeSpace,
                         viscosity: ViscosityModel, params: CarreauParams) -> np.ndarray:
    """2 nu(theta) [eta(|eps(w)|^2) + sigma |eps(w)|^(r-2)] at quadrature points"""
    theta = T.values(frozen.theta)
    if frozen.lift is not None:
        pts = V.tab.points
        theta = theta + frozen.lift(pts[..., 0], pts[..., 1])
    z = frobenius_sq(V.strain(frozen.w))
    coefficient = np.asarray(eta(z, params))
    if frozen.sigma > 0:
        if frozen.r_reg == 2:
            coefficient = coefficient + frozen.sigma
        else:
            # |eps|^(r-2) vanishes with eps for r > 2
            coefficient = coefficient + frozen.sigma * z ** (0.5 * (frozen.r_reg - 2.0))
    return 2.0 * np.asarray(nu(theta, viscosity)) * coefficient


def assemble_a1_frozen(frozen: FrozenCoefficients, V: FeSpace, T: FeSpace,
                       viscosity: ViscosityModel, params: CarreauParams) -> sp.csr_matrix:
    """Frozen momentum block A_ij = integral 2 nu [eta + sigma |eps(w)|^(r-2)] eps(phi_j) : eps(phi_i)"""
    check_compatible(V, T)
    coefficient = momentum_coefficient(frozen, V, T, viscosity, params)
    return assemble_strain_stiffness(V, coefficient)


def assemble_b(V: FeSpace, Q: FeSpace) -> sp.csr_matrix:
    """B[l, j] = -integral q_l div(phi_j), shape (n_pressure, n_velocity)"""
    check_compatible(V, Q)
    tab_v, tab_q = V.tab, Q.tab
    rows, cols, data = [], [], []
    for c in range(2):
        local = -np.einsum("eq,ql,eqj->elj", tab_v.wdet, tab_q.phi, tab_v.grads[..., c])
        r, k = _block_indices(Q.cell_dofs, V.component_cell_dofs(c))
        rows.append(r.ravel())
        cols.append(k.ravel())
        data.append(local.ravel())
    return _to_csr(np.concatenate(rows), np.concatenate(cols), np.concatenate(data),
                   (Q.ndof, V.ndof))


def assemble_scalar_stiffness(T: FeSpace, coefficient: Optional[np.ndarray] = None) -> sp.csr_matrix:
    tab = T.tab
    weights = tab.wdet if coefficient is None else tab.wdet * coefficient
    local = np.einsum("eq,eqid,eqjd->eij", weights, tab.grads, tab.grads)
    rows, cols = _block_indices(T.cell_dofs, T.cell_dofs)
    return _to_csr(rows, cols, local, (T.ndof, T.ndof))


def assemble_mass(T: FeSpace) -> sp.csr_matrix:
    tab = T.tab
    local = np.einsum("eq,qi,qj->eij", tab.wdet, tab.phi, tab.phi)
    rows, cols = _block_indices(T.cell_dofs, T.cell_dofs)
    return _to_csr(rows, cols, local, (T.ndof, T.ndof))


def assemble_a2(T: FeSpace, kappa: float) -> sp.csr_matrix:
    """kappa-scaled scalar stiffness"""
    if not kappa > 0:
        raise ConfigurationError(f"kappa must be > 0, got {kappa}")
    return (kappa * assemble_scalar_stiffness(T)).tocsr()


def assemble_convection(u: np.ndarray, V: FeSpace, T: FeSpace) -> sp.csr_matrix:
    """N[i, j] = integral (u . grad psi_j) psi_i"""
    check_compatible(V, T)
    velocity = V.values(u)
    tab = T.tab
    local = np.einsum("eq,eqd,eqjd,qi->eij", tab.wdet, velocity, tab.grads, tab.phi)
    rows, cols = _block_indices(T.cell_dofs, T.cell_dofs)
    return _to_csr(rows, cols, local, (T.ndof, T.ndof))


def assemble_ch(u: np.ndarray, V: FeSpace, T: FeSpace) -> sp.csr_matrix:
    """Skew convection C = (N - N^T) / 2, exactly antisymmetric"""
    n = assemble_convection(u, V, T)
    c = (0.5 * (n - n.T)).tocsr()
    c.eliminate_zeros()
    return c


def assemble_loads(case, V: FeSpace, T: FeSpace) -> Tuple[np.ndarray, np.ndarray]:
    """(integral f . phi_i, integral g psi_i) for the case forcings"""
    check_compatible(V, T)
    pts = V.tab.points
    x, y = pts[..., 0], pts[..., 1]
    f = np.asarray(case.f(x, y))
    g = np.asarray(case.g(x, y))
    f_vec = np.concatenate([
        _scalar_load(V.tab, V.cell_dofs, f[c], V.n_scalar) for c in range(2)
    ])
    g_vec = _scalar_load(T.tab, T.cell_dofs, g, T.n_scalar)
    return f_vec, g_vec


def _scalar_load(tab: Tabulation, cell_dofs: np.ndarray, values: np.ndarray, n: int) -> np.ndarray:
    local = np.einsum("eq,eq,qi->ei", tab.wdet, values, tab.phi)
    return np.bincount(cell_dofs.ravel(), weights=local.ravel(), minlength=n)


def zero_mean_constraint(Q: FeSpace) -> np.ndarray:
    """m_l = integral q_l"""
    tab = Q.tab
    local = np.einsum("eq,qi->ei", tab.wdet, tab.phi)
    return np.bincount(Q.cell_dofs.ravel(), weights=local.ravel(), minlength=Q.ndof)


def boundary_values(space: FeSpace, rule: BoundaryRule) -> Tuple[np.ndarray, np.ndarray]:
    """Global boundary indices and the nodal values of `rule` there"""
    indices = space.boundary_dofs
    if callable(rule):
        coords = space.boundary_coords
        raw = np.asarray(rule(coords[:, 0], coords[:, 1]), dtype=float)
        shape = (len(coords),) if space.components == 1 else (space.components, len(coords))
        values = np.array(np.broadcast_to(raw, shape), dtype=float).ravel()
    else:
        values = np.array(np.broadcast_to(np.asarray(rule, dtype=float), indices.shape), dtype=float)
    return indices, values


def flux_corrected_values(V: FeSpace, B: sp.csr_matrix, indices: np.ndarray,
                          values: np.ndarray) -> Tuple[np.ndarray, float]:
    """Remove the discrete net flux of velocity boundary data

    The boundary trace of w = (x - 1/2, y - 1/2), whose flux is 2, is scaled
    so that sum_l (B g)_l = 0 for the extended data g.
    """
    extended = np.zeros(V.ndof)
    extended[indices] = values
    flux = -float(np.sum(B @ extended))

    _, w_values = boundary_values(V, lambda x, y: np.stack([x - 0.5, y - 0.5]))
    w_extended = np.zeros(V.ndof)
    w_extended[indices] = w_values
    w_flux = -float(np.sum(B @ w_extended))

    corrected = values - (flux / w_flux) * w_values
    logger.debug(f"Velocity boundary flux {flux:.3e} removed")
    return corrected, flux


def saddle_system(A: sp.spmatrix, B: sp.spmatrix, m: np.ndarray, f_vec: np.ndarray) -> SparseSystem:
    """[[A, B^T, 0], [B, 0, m], [0, m^T, 0]] with one pressure-mean multiplier"""
    n_u, n_p = A.shape[0], B.shape[0]
    m_col = sp.csr_matrix(m.reshape(-1, 1))
    matrix = sp.bmat([[A, B.T, None], [B, None, m_col], [None, m_col.T, None]], format="csr")
    rhs = np.concatenate([f_vec, np.zeros(n_p + 1)])
    blocks = {"u": (0, n_u), "pi": (n_u, n_u + n_p), "multiplier": (n_u + n_p, n_u + n_p + 1)}
    return SparseSystem(matrix=matrix, rhs=rhs, blocks=blocks)


def apply_dirichlet(system: SparseSystem, indices: np.ndarray, values: np.ndarray) -> SparseSystem:
    """Identity rows at `indices` with column elimination into the right-hand side"""
    n = system.size
    values = np.asarray(values, dtype=float)
    prescribed = np.zeros(n)
    prescribed[indices] = values
    rhs = system.rhs - system.matrix @ prescribed

    mask = np.zeros(n)
    mask[indices] = 1.0
    keep = sp.diags(1.0 - mask)
    matrix = (keep @ system.matrix @ keep + sp.diags(mask)).tocsr()
    matrix.eliminate_zeros()
    rhs[indices] = values
    return SparseSystem(matrix=matrix, rhs=rhs, blocks=dict(system.blocks))


def apply_dirichlet_rule(system: SparseSystem, space: FeSpace, rule: BoundaryRule,
                         offset: int = 0) -> SparseSystem:
    """apply_dirichlet with values interpolated from `rule` at the space's boundary nodes"""
    indices, values = boundary_values(space, rule)
    return apply_dirichlet(system, indices + offset, values)


def dump_matrix(matrix: sp.spmatrix, path: Union[str, Path]) -> None:
    """Coordinate text dump, one 'row col value' line per stored entry"""
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    lines = [f"{coo.row[k]} {coo.col[k]} {format_number(coo.data[k])}" for k in order]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"Matrix {matrix.shape} with {coo.nnz} entries written to {path}")
