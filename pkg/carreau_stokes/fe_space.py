"""
fe_space: continuous Lagrange spaces on a Mesh

Global numbering is vertices first, then (degree-1) nodes per edge running
from the lower to the higher vertex index, then cell-interior nodes. Vector
fields are component-blocked: coefficients [u_x (n_scalar), u_y (n_scalar)].
Element geometry and basis values are tabulated once per quadrature rule.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .constitutive import frobenius_sq
from .fe_basis import MAX_EXACTNESS, QuadratureRule, quadrature, reference_basis
from .mesh import Mesh
from .stokes_types import BasisError, MeshMismatchError

logger = logging.getLogger(__name__)

TAYLOR_HOOD_DEGREES = (2, 3)


@dataclass(frozen=True, eq=False)
class Tabulation:
    """Quadrature points, weights and basis data for every element"""
    rule: QuadratureRule
    points: np.ndarray   # (n_cells, n_q, 2) physical coordinates
    wdet: np.ndarray     # (n_cells, n_q) weight times |det J|
    phi: np.ndarray      # (n_q, n_local)
    grads: np.ndarray    # (n_cells, n_q, n_local, 2) physical gradients


def default_exactness(degree: int) -> int:
    return min(2 * degree + 4, MAX_EXACTNESS)


class FeSpace:
    """Conforming P_k space with `components` copies of the scalar space"""

    def __init__(self, mesh: Mesh, degree: int, components: int = 1,
                 rule: Optional[QuadratureRule] = None):
        if components not in (1, 2):
            raise BasisError(f"components must be 1 or 2, got {components}")
        self.mesh = mesh
        self.degree = degree
        self.components = components
        self.basis = reference_basis(degree)
        self.rule = rule if rule is not None else quadrature(default_exactness(degree))
        self.cell_dofs, self.dof_coords, self.boundary_scalar_dofs = _number_dofs(mesh, degree)
        self.n_scalar = len(self.dof_coords)
        self._tabulations: Dict[int, Tabulation] = {}
        self.tab = self.tabulate(self.rule)

    def __repr__(self) -> str:
        return (f"FeSpace(P{self.degree}, components={self.components}, "
                f"ndof={self.ndof}, exactness={self.rule.degree})")

    @property
    def ndof(self) -> int:
        return self.components * self.n_scalar

    @property
    def n_local(self) -> int:
        return self.cell_dofs.shape[1]

    def component_cell_dofs(self, component: int) -> np.ndarray:
        return self.cell_dofs + component * self.n_scalar

    @property
    def boundary_dofs(self) -> np.ndarray:
        """Global boundary indices over all components"""
        return np.concatenate([self.boundary_scalar_dofs + c * self.n_scalar
                               for c in range(self.components)])

    @property
    def boundary_coords(self) -> np.ndarray:
        return self.dof_coords[self.boundary_scalar_dofs]

    def tabulate(self, rule: QuadratureRule) -> Tabulation:
        cached = self._tabulations.get(rule.degree)
        if cached is not None:
            return cached
        v = self.mesh.vertices[self.mesh.triangles]
        jac = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]], axis=2)
        det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        inv_t = np.linalg.inv(jac).transpose(0, 2, 1)
        points = v[:, 0][:, None, :] + np.einsum("eij,qj->eqi", jac, rule.points)
        phi = self.basis.eval(rule.points)
        grads = np.einsum("eab,qib->eqia", inv_t, self.basis.grad(rule.points))
        tab = Tabulation(rule=rule, points=points,
                         wdet=rule.weights[None, :] * np.abs(det)[:, None],
                         phi=phi, grads=grads)
        self._tabulations[rule.degree] = tab
        return tab

    def _local(self, coeffs: np.ndarray) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.ndof,):
            raise MeshMismatchError(
                f"coefficient vector has shape {coeffs.shape}, space expects ({self.ndof},)"
            )
        if self.components == 1:
            return coeffs[self.cell_dofs]
        return coeffs.reshape(self.components, self.n_scalar)[:, self.cell_dofs]

    def values(self, coeffs: np.ndarray, tab: Optional[Tabulation] = None) -> np.ndarray:
        """Field values at quadrature points: (n_cells, n_q) or (n_cells, n_q, 2)"""
        tab = tab or self.tab
        local = self._local(coeffs)
        if self.components == 1:
            return np.einsum("qi,ei->eq", tab.phi, local)
        return np.einsum("qi,cei->eqc", tab.phi, local)

    def gradients(self, coeffs: np.ndarray, tab: Optional[Tabulation] = None) -> np.ndarray:
        """Gradients at quadrature points; for vectors entry [..., i, j] is d_j u_i"""
        tab = tab or self.tab
        local = self._local(coeffs)
        if self.components == 1:
            return np.einsum("eqid,ei->eqd", tab.grads, local)
        return np.einsum("eqid,cei->eqcd", tab.grads, local)

    def strain(self, coeffs: np.ndarray, tab: Optional[Tabulation] = None) -> np.ndarray:
        """Symmetric gradient as (xx, xy, yy), shape (n_cells, n_q, 3)"""
        if self.components != 2:
            raise BasisError("strain is defined for vector spaces only")
        g = self.gradients(coeffs, tab)
        return np.stack([g[..., 0, 0], 0.5 * (g[..., 0, 1] + g[..., 1, 0]), g[..., 1, 1]], axis=-1)

    def interpolate(self, func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
        """Nodal interpolant of func(x, y); vector fields return shape (2, n)"""
        x, y = self.dof_coords[:, 0], self.dof_coords[:, 1]
        shape = (self.n_scalar,) if self.components == 1 else (self.components, self.n_scalar)
        values = np.broadcast_to(np.asarray(func(x, y), dtype=float), shape)
        return np.array(values, dtype=float).ravel()

    def evaluate_at(self, coeffs: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Point evaluation anywhere in the mesh: shape (n,) or (n, 2)"""
        cells, refs = self.mesh.locate(points)
        phi = self.basis.eval(refs)
        local = self._local(coeffs)
        if self.components == 1:
            return np.sum(phi * local[cells], axis=1)
        return np.stack([np.sum(phi * local[c][cells], axis=1) for c in range(self.components)], axis=1)


def _number_dofs(mesh: Mesh, degree: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    nv, nt = mesh.n_vertices, mesh.n_triangles
    edges, tri_edges = mesh.edge_data
    per_edge = degree - 1
    n_local = (degree + 1) * (degree + 2) // 2

    cell = np.empty((nt, n_local), dtype=np.int64)
    cell[:, :3] = mesh.triangles
    col = 3
    for k in range(3):
        forward = mesh.triangles[:, k] == edges[tri_edges[:, k], 0]
        for j in range(1, degree):
            offset = np.where(forward, j - 1, degree - j - 1)
            cell[:, col] = nv + tri_edges[:, k] * per_edge + offset
            col += 1
    if degree == 3:
        cell[:, col] = nv + len(edges) * per_edge + np.arange(nt)

    a, b = mesh.vertices[edges[:, 0]], mesh.vertices[edges[:, 1]]
    fractions = np.arange(1, degree) / degree
    edge_coords = a[:, None, :] + fractions[None, :, None] * (b - a)[:, None, :]
    parts = [mesh.vertices, edge_coords.reshape(-1, 2)]
    if degree == 3:
        parts.append(mesh.vertices[mesh.triangles].mean(axis=1))
    coords = np.concatenate(parts)

    boundary_edge_dofs = (nv + mesh.boundary_edge_indices[:, None] * per_edge
                          + np.arange(per_edge)[None, :]).ravel()
    boundary = np.unique(np.concatenate([mesh.boundary_vertices, boundary_edge_dofs]))
    return cell, coords, boundary


@dataclass(frozen=True, eq=False)
class DiscreteSpaces:
    """Taylor-Hood velocity/pressure pair plus the temperature space"""
    velocity: FeSpace
    pressure: FeSpace
    temperature: FeSpace

    @property
    def mesh(self) -> Mesh:
        return self.velocity.mesh

    @property
    def degree(self) -> int:
        return self.velocity.degree

    @property
    def ndofs(self) -> Tuple[int, int, int]:
        return self.velocity.ndof, self.pressure.ndof, self.temperature.ndof


def build_spaces(mesh: Mesh, degree: int, exactness: Optional[int] = None) -> DiscreteSpaces:
    """P_k / P_(k-1) / P_k spaces sharing one quadrature rule"""
    if degree not in TAYLOR_HOOD_DEGREES:
        raise BasisError(f"Velocity degree must be one of {TAYLOR_HOOD_DEGREES}, got {degree!r}")
    rule = quadrature(exactness if exactness is not None else default_exactness(degree))
    spaces = DiscreteSpaces(
        velocity=FeSpace(mesh, degree, components=2, rule=rule),
        pressure=FeSpace(mesh, degree - 1, components=1, rule=rule),
        temperature=FeSpace(mesh, degree, components=1, rule=rule),
    )
    logger.debug(f"Built P{degree}/P{degree - 1}/P{degree} spaces with ndofs {spaces.ndofs}")
    return spaces


def check_compatible(*spaces: FeSpace) -> None:
    first = spaces[0]
    for other in spaces[1:]:
        if other.mesh is not first.mesh:
            raise MeshMismatchError("finite element spaces live on different meshes")
        if other.rule.degree != first.rule.degree:
            raise MeshMismatchError(
                f"finite element spaces use different quadrature rules "
                f"({first.rule.degree} vs {other.rule.degree})"
            )


# Norms


def integrate(tab: Tabulation, values: np.ndarray) -> float:
    return float(np.sum(tab.wdet * values))


def lp_norm(tab: Tabulation, magnitude: np.ndarray, s: float) -> float:
    """(integral |m|^s)^(1/s) for a pointwise non-negative magnitude"""
    return integrate(tab, np.abs(magnitude) ** s) ** (1.0 / s)


def vector_magnitude(values: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(values ** 2, axis=-1))


def matrix_magnitude(values: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(values ** 2, axis=(-2, -1)))


def strain_magnitude(strain: np.ndarray) -> np.ndarray:
    return np.sqrt(frobenius_sq(strain))
