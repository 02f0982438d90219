"""
mesh: structured triangulations of the unit square

Builds conforming meshes of (0,1)^2 with a single Dirichlet boundary tag,
refines them by midpoint subdivision and reports their size metrics.
Meshes are immutable after construction.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree

from .stokes_types import MeshError, format_number

logger = logging.getLogger(__name__)

BOUNDARY_DIRICHLET = 1
LOCATE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class Mesh:
    """Triangulation with counterclockwise triangles and tagged boundary edges"""
    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_tags: np.ndarray

    def __post_init__(self):
        vertices = np.ascontiguousarray(self.vertices, dtype=float)
        triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        boundary_edges = np.ascontiguousarray(self.boundary_edges, dtype=np.int64).reshape(-1, 2)
        tags = np.ascontiguousarray(self.boundary_tags, dtype=np.int64)

        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise MeshError(f"vertices must have shape (n, 2), got {vertices.shape}")
        if triangles.ndim != 2 or triangles.shape[1] != 3 or len(triangles) == 0:
            raise MeshError(f"triangles must have shape (m, 3) with m >= 1, got {triangles.shape}")
        if triangles.min() < 0 or triangles.max() >= len(vertices):
            raise MeshError("triangle references a vertex index out of range")
        if len(tags) != len(boundary_edges):
            raise MeshError("one boundary tag is required per boundary edge")

        areas = _signed_areas(vertices, triangles)
        if np.any(areas <= 0.0):
            bad = int(np.argmin(areas))
            raise MeshError(f"triangle {bad} has non-positive signed area {areas[bad]:.3e}")

        for name, value in (("vertices", vertices), ("triangles", triangles),
                            ("boundary_edges", boundary_edges), ("boundary_tags", tags)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def areas(self) -> np.ndarray:
        return _signed_areas(self.vertices, self.triangles)

    @cached_property
    def edge_data(self) -> Tuple[np.ndarray, np.ndarray]:
        """Unique edges (sorted vertex pairs) and the triangle-to-edge map

        Local edge k of a triangle joins local vertices k and (k+1) mod 3.
        """
        local = np.stack([self.triangles[:, [0, 1]],
                          self.triangles[:, [1, 2]],
                          self.triangles[:, [2, 0]]], axis=1)
        pairs = np.sort(local.reshape(-1, 2), axis=1)
        edges, inverse = np.unique(pairs, axis=0, return_inverse=True)
        return edges, inverse.reshape(-1, 3)

    @property
    def edges(self) -> np.ndarray:
        return self.edge_data[0]

    @cached_property
    def boundary_edge_indices(self) -> np.ndarray:
        """Indices into `edges` of the tagged boundary edges"""
        lookup: Dict[Tuple[int, int], int] = {
            (int(a), int(b)): k for k, (a, b) in enumerate(self.edges)
        }
        try:
            return np.array(
                [lookup[tuple(sorted((int(a), int(b))))] for a, b in self.boundary_edges],
                dtype=np.int64,
            )
        except KeyError as e:
            raise MeshError(f"boundary edge {e.args[0]} is not an edge of the mesh") from e

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        return np.unique(self.boundary_edges)

    @cached_property
    def _centroid_tree(self) -> cKDTree:
        centroids = self.vertices[self.triangles].mean(axis=1)
        return cKDTree(centroids)

    def locate(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Find the containing triangle and reference coordinates of each point

        Args:
            points: array of shape (n, 2)

        Returns:
            (triangle indices, reference coordinates of shape (n, 2))

        Raises:
            MeshError: if a point lies outside the mesh
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        k = min(8, self.n_triangles)
        _, candidates = self._centroid_tree.query(points, k=k)
        candidates = np.asarray(candidates).reshape(len(points), k)

        cells = np.full(len(points), -1, dtype=np.int64)
        refs = np.zeros((len(points), 2))
        for i, point in enumerate(points):
            for cell in candidates[i]:
                ref = self._to_reference(int(cell), point)
                if _inside_reference(ref):
                    cells[i], refs[i] = cell, ref
                    break
            else:
                # k-d tree neighbours can miss slivers next to large cells
                for cell in range(self.n_triangles):
                    ref = self._to_reference(cell, point)
                    if _inside_reference(ref):
                        cells[i], refs[i] = cell, ref
                        break
                else:
                    raise MeshError(f"point ({point[0]}, {point[1]}) lies outside the mesh")
        return cells, refs

    def _to_reference(self, cell: int, point: np.ndarray) -> np.ndarray:
        v0, v1, v2 = self.vertices[self.triangles[cell]]
        jac = np.column_stack([v1 - v0, v2 - v0])
        return np.linalg.solve(jac, point - v0)


@dataclass(frozen=True)
class MeshMetrics:
    """Size metrics of a mesh"""
    h_max: float
    n_vertices: int
    n_triangles: int


def _signed_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    v0, v1, v2 = (vertices[triangles[:, k]] for k in range(3))
    e1, e2 = v1 - v0, v2 - v0
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def _inside_reference(ref: np.ndarray) -> bool:
    x, y = ref
    return x >= -LOCATE_TOLERANCE and y >= -LOCATE_TOLERANCE and x + y <= 1.0 + LOCATE_TOLERANCE


def unit_square_mesh(n: int) -> Mesh:
    """Structured n x n mesh of the unit square

    Each cell is split by its lower-left to upper-right diagonal.
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise MeshError(f"unit_square_mesh needs a positive integer n, got {n!r}")
    n = int(n)

    coords = np.arange(n + 1) / n
    xx, yy = np.meshgrid(coords, coords)
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    def vid(i, j):
        return j * (n + 1) + i

    i, j = np.meshgrid(np.arange(n), np.arange(n))
    i, j = i.ravel(), j.ravel()
    v00, v10, v01, v11 = vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    triangles = np.stack([lower, upper], axis=1).reshape(-1, 3)

    # counterclockwise walk around the square
    k = np.arange(n)
    bottom = np.column_stack([vid(k, 0), vid(k + 1, 0)])
    right = np.column_stack([vid(n, k), vid(n, k + 1)])
    top = np.column_stack([vid(n - k, n), vid(n - k - 1, n)])
    left = np.column_stack([vid(0, n - k), vid(0, n - k - 1)])
    boundary_edges = np.concatenate([bottom, right, top, left])

    mesh = Mesh(vertices, triangles, boundary_edges,
                np.full(len(boundary_edges), BOUNDARY_DIRICHLET))
    logger.debug(f"Built unit square mesh n={n}: {mesh.n_vertices} vertices, "
                 f"{mesh.n_triangles} triangles")
    return mesh


def refine_uniform(mesh: Mesh) -> Mesh:
    """Split every triangle into four congruent children through edge midpoints"""
    edges, tri_edges = mesh.edge_data
    nv = mesh.n_vertices
    midpoints = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
    vertices = np.concatenate([mesh.vertices, midpoints])

    a, b, c = mesh.triangles.T
    m_ab, m_bc, m_ca = (nv + tri_edges[:, k] for k in range(3))
    children = np.stack([
        np.column_stack([a, m_ab, m_ca]),
        np.column_stack([m_ab, b, m_bc]),
        np.column_stack([m_ca, m_bc, c]),
        np.column_stack([m_ab, m_bc, m_ca]),
    ], axis=1).reshape(-1, 3)

    mid = nv + mesh.boundary_edge_indices
    first = np.column_stack([mesh.boundary_edges[:, 0], mid])
    second = np.column_stack([mid, mesh.boundary_edges[:, 1]])
    boundary_edges = np.stack([first, second], axis=1).reshape(-1, 2)
    tags = np.repeat(mesh.boundary_tags, 2)

    refined = Mesh(vertices, children, boundary_edges, tags)
    logger.debug(f"Refined mesh to {refined.n_triangles} triangles")
    return refined


def metrics(mesh: Mesh) -> MeshMetrics:
    """Longest edge over all triangles plus entity counts"""
    tri = mesh.vertices[mesh.triangles]
    lengths = np.stack([
        np.linalg.norm(tri[:, 1] - tri[:, 0], axis=1),
        np.linalg.norm(tri[:, 2] - tri[:, 1], axis=1),
        np.linalg.norm(tri[:, 0] - tri[:, 2], axis=1),
    ])
    return MeshMetrics(h_max=float(lengths.max()),
                       n_vertices=mesh.n_vertices,
                       n_triangles=mesh.n_triangles)


def format_mesh(mesh: Mesh) -> str:
    lines = [f"v {format_number(x)} {format_number(y)}" for x, y in mesh.vertices]
    lines += [f"t {i} {j} {k}" for i, j, k in mesh.triangles]
    lines += [f"b {i} {j}" for i, j in mesh.boundary_edges]
    return "\n".join(lines) + "\n"


def dump_mesh(mesh: Mesh, path: Union[str, Path]) -> None:
    """Write the plain-text mesh dump (v / t / b lines)"""
    Path(path).write_text(format_mesh(mesh), encoding="utf-8")
    logger.info(f"Mesh written to {path}")
