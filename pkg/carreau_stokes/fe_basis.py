"""
fe_basis: reference-triangle Lagrange bases, quadrature and affine maps

The reference triangle has vertices (0,0), (1,0), (0,1). Lagrange nodes are
ordered vertices first, then the interior nodes of edge k (from local vertex
k towards local vertex k+1), then cell-interior nodes.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .stokes_types import BasisError

logger = logging.getLogger(__name__)

SUPPORTED_DEGREES = (1, 2, 3)
MAX_EXACTNESS = 12
POINT_TOLERANCE = 1e-12

REFERENCE_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def _check_degree(degree: int) -> int:
    if degree not in SUPPORTED_DEGREES:
        raise BasisError(f"Unsupported Lagrange degree {degree!r}; expected one of {SUPPORTED_DEGREES}")
    return int(degree)


def lagrange_nodes(degree: int) -> np.ndarray:
    degree = _check_degree(degree)
    nodes: List[np.ndarray] = list(REFERENCE_VERTICES)
    for k in range(3):
        start, end = REFERENCE_VERTICES[k], REFERENCE_VERTICES[(k + 1) % 3]
        for j in range(1, degree):
            nodes.append(start + (j / degree) * (end - start))
    if degree == 3:
        nodes.append(np.array([1.0 / 3.0, 1.0 / 3.0]))
    return np.array(nodes)


def _exponents(degree: int) -> np.ndarray:
    return np.array([(a, total - a) for total in range(degree + 1) for a in range(total, -1, -1)])


class ReferenceBasis:
    """Nodal Lagrange basis of a given degree on the reference triangle

    Basis coefficients come from inverting the monomial Vandermonde matrix
    at the Lagrange nodes.
    """

    def __init__(self, degree: int):
        self.degree = _check_degree(degree)
        self.node_coords = lagrange_nodes(self.degree)
        self._exponents = _exponents(self.degree)
        vandermonde = self._monomials(self.node_coords)
        self._coefficients = np.linalg.inv(vandermonde)

    @property
    def n_nodes(self) -> int:
        return len(self.node_coords)

    def _monomials(self, points: np.ndarray) -> np.ndarray:
        a, b = self._exponents[:, 0], self._exponents[:, 1]
        x, y = points[:, 0:1], points[:, 1:2]
        return x ** a * y ** b

    def _monomial_gradients(self, points: np.ndarray) -> np.ndarray:
        a, b = self._exponents[:, 0], self._exponents[:, 1]
        x, y = points[:, 0:1], points[:, 1:2]
        dx = np.where(a > 0, a * x ** np.maximum(a - 1, 0) * y ** b, 0.0)
        dy = np.where(b > 0, b * x ** a * y ** np.maximum(b - 1, 0), 0.0)
        return np.stack([dx, dy], axis=-1)

    def eval(self, points: np.ndarray) -> np.ndarray:
        """Basis values, shape (n_points, n_nodes)"""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return self._monomials(points) @ self._coefficients

    def grad(self, points: np.ndarray) -> np.ndarray:
        """Reference gradients, shape (n_points, n_nodes, 2)"""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        mono = self._monomial_gradients(points)
        return np.einsum("pmd,mn->pnd", mono, self._coefficients)


@lru_cache(maxsize=None)
def reference_basis(degree: int) -> ReferenceBasis:
    return ReferenceBasis(degree)


def lagrange_basis(degree: int, point) -> Tuple[np.ndarray, np.ndarray]:
    """Values and reference gradients of all basis functions at one point

    Args:
        degree: polynomial degree in {1, 2, 3}
        point: reference coordinates inside the reference triangle

    Returns:
        (values of shape (n_nodes,), gradients of shape (n_nodes, 2))
    """
    basis = reference_basis(_check_degree(degree))
    x, y = np.asarray(point, dtype=float).reshape(2)
    if x < -POINT_TOLERANCE or y < -POINT_TOLERANCE or x + y > 1.0 + POINT_TOLERANCE:
        raise BasisError(f"Point ({x}, {y}) lies outside the reference triangle")
    pts = np.array([[x, y]])
    return basis.eval(pts)[0], basis.grad(pts)[0]


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Quadrature on the reference triangle; weights sum to 1/2"""
    points: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def n_points(self) -> int:
        return len(self.weights)

    def integrate(self, func) -> float:
        return float(self.weights @ func(self.points[:, 0], self.points[:, 1]))


@lru_cache(maxsize=None)
def quadrature(exactness_degree: int) -> QuadratureRule:
    """Collapsed Gauss rule exact for polynomials up to `exactness_degree`

    Gauss-Jacobi points in x (weight 1-x absorbs the collapse Jacobian) and
    Gauss-Legendre points along each collapsed fibre, mapped by
    (u, v) -> (u, (1-u) v).
    """
    if isinstance(exactness_degree, bool) or not isinstance(exactness_degree, (int, np.integer)):
        raise BasisError(f"Quadrature exactness must be an integer, got {exactness_degree!r}")
    if exactness_degree < 0 or exactness_degree > MAX_EXACTNESS:
        raise BasisError(
            f"Quadrature exactness {exactness_degree} outside the supported range 0..{MAX_EXACTNESS}"
        )
    n = int(exactness_degree) // 2 + 1
    tj, wj = roots_jacobi(n, 1.0, 0.0)
    tl, wl = roots_legendre(n)
    u = 0.5 * (1.0 + tj)
    v = 0.5 * (1.0 + tl)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    points = np.column_stack([uu.ravel(), ((1.0 - uu) * vv).ravel()])
    weights = np.outer(wj, wl).ravel() / 8.0
    logger.debug(f"Built collapsed Gauss rule: exactness {exactness_degree}, {len(weights)} points")
    return QuadratureRule(points=points, weights=weights, degree=int(exactness_degree))


class AffineMap:
    """Affine map from the reference triangle onto a physical triangle"""

    def __init__(self, vertices: np.ndarray):
        self.vertices = np.asarray(vertices, dtype=float).reshape(3, 2)
        v0, v1, v2 = self.vertices
        self.jacobian = np.column_stack([v1 - v0, v2 - v0])
        self.det = float(np.linalg.det(self.jacobian))
        scale = max(float(np.abs(self.jacobian).max()), np.finfo(float).tiny)
        if abs(self.det) <= 1e-14 * scale * scale:
            raise BasisError(f"Degenerate triangle with vertices {self.vertices.tolist()}")
        if self.det < 0:
            raise BasisError(f"Clockwise triangle with vertices {self.vertices.tolist()}")
        self.inverse_transpose = np.linalg.inv(self.jacobian).T

    def to_physical(self, ref_points: np.ndarray) -> np.ndarray:
        ref_points = np.atleast_2d(ref_points)
        return self.vertices[0] + ref_points @ self.jacobian.T

    def to_reference(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return (points - self.vertices[0]) @ self.inverse_transpose

    def physical_gradients(self, ref_gradients: np.ndarray) -> np.ndarray:
        return ref_gradients @ self.inverse_transpose.T


def affine_map(vertices) -> AffineMap:
    return AffineMap(np.asarray(vertices, dtype=float))
