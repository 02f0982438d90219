"""
Tests for the structured unit-square mesh
"""

import math

import numpy as np
import pytest

from ..mesh import BOUNDARY_DIRICHLET, Mesh, dump_mesh, metrics, refine_uniform, unit_square_mesh
from ..stokes_types import MeshError


def _sorted_rows(a):
    a = np.round(np.asarray(a), 12)
    return a[np.lexsort(a.T[::-1])]


class TestUnitSquareMesh:
    """Construction of the n x n triangulation"""

    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_counts(self, n):
        mesh = unit_square_mesh(n)
        assert mesh.n_vertices == (n + 1) ** 2
        assert mesh.n_triangles == 2 * n * n
        assert len(mesh.boundary_edges) == 4 * n
        assert len(mesh.edges) == 3 * n * n + 2 * n
        assert len(mesh.boundary_vertices) == 4 * n

    def test_areas_positive_and_cover_square(self, mesh4):
        assert np.all(mesh4.areas > 0)
        assert mesh4.areas.sum() == pytest.approx(1.0, abs=1e-14)
        assert np.allclose(mesh4.areas, 1.0 / 32)

    def test_boundary_edges_tagged_and_on_boundary(self, mesh4):
        assert np.all(mesh4.boundary_tags == BOUNDARY_DIRICHLET)
        pts = mesh4.vertices[mesh4.boundary_edges.ravel()]
        on_boundary = np.isclose(pts, 0.0) | np.isclose(pts, 1.0)
        assert np.all(on_boundary.any(axis=1))

    def test_boundary_walk_is_counterclockwise(self, mesh2):
        # consecutive edges share their end/start vertex
        edges = mesh2.boundary_edges
        assert np.all(edges[:-1, 1] == edges[1:, 0])
        assert edges[-1, 1] == edges[0, 0]

    def test_h_max(self):
        assert metrics(unit_square_mesh(8)).h_max == pytest.approx(math.sqrt(2) / 8)

    @pytest.mark.parametrize("bad", [0, -3, 1.5, "4", True])
    def test_invalid_n(self, bad):
        with pytest.raises(MeshError):
            unit_square_mesh(bad)

    def test_arrays_are_read_only(self, mesh2):
        with pytest.raises(ValueError):
            mesh2.vertices[0, 0] = 5.0


class TestMeshValidation:
    def test_clockwise_triangle_rejected(self):
        vertices = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(MeshError, match="signed area"):
            Mesh(vertices, np.array([[0, 2, 1]]), np.zeros((0, 2)), np.zeros(0))

    def test_out_of_range_vertex_rejected(self):
        vertices = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(MeshError):
            Mesh(vertices, np.array([[0, 1, 3]]), np.zeros((0, 2)), np.zeros(0))

    def test_tag_count_must_match(self):
        vertices = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(MeshError):
            Mesh(vertices, np.array([[0, 1, 2]]), np.array([[0, 1]]), np.zeros(0))


class TestRefinement:
    def test_refine_matches_finer_structured_mesh(self, mesh2):
        refined = refine_uniform(mesh2)
        finer = unit_square_mesh(4)
        assert refined.n_triangles == finer.n_triangles
        assert refined.n_vertices == finer.n_vertices
        assert len(refined.boundary_edges) == len(finer.boundary_edges)
        assert np.allclose(_sorted_rows(refined.vertices), _sorted_rows(finer.vertices))
        assert metrics(refined).h_max == pytest.approx(metrics(finer).h_max)
        assert np.allclose(refined.areas, 1.0 / 32)

    def test_refined_triangle_sets_match(self, mesh2):
        refined = refine_uniform(mesh2)
        finer = unit_square_mesh(4)
        centroids_a = refined.vertices[refined.triangles].mean(axis=1)
        centroids_b = finer.vertices[finer.triangles].mean(axis=1)
        assert np.allclose(_sorted_rows(centroids_a), _sorted_rows(centroids_b))


class TestLocate:
    def test_locate_recovers_points(self, mesh4):
        rng = np.random.default_rng(3)
        points = rng.uniform(0.0, 1.0, size=(50, 2))
        cells, refs = mesh4.locate(points)
        v = mesh4.vertices[mesh4.triangles[cells]]
        mapped = v[:, 0] + refs[:, :1] * (v[:, 1] - v[:, 0]) + refs[:, 1:] * (v[:, 2] - v[:, 0])
        assert np.allclose(mapped, points)
        assert np.all(refs >= -1e-12)
        assert np.all(refs.sum(axis=1) <= 1 + 1e-12)

    def test_locate_corners(self, mesh2):
        cells, _ = mesh2.locate(np.array([[0.0, 0.0], [1.0, 1.0]]))
        assert np.all(cells >= 0)

    def test_locate_outside(self, mesh2):
        with pytest.raises(MeshError, match="outside"):
            mesh2.locate(np.array([[1.5, 0.5]]))


class TestDump:
    def test_dump_mesh(self, mesh2, tmp_path):
        path = tmp_path / "mesh.txt"
        dump_mesh(mesh2, path)
        lines = path.read_text().splitlines()
        assert len(lines) == mesh2.n_vertices + mesh2.n_triangles + len(mesh2.boundary_edges)
        assert lines[0] == "v 0 0"
        assert sum(line.startswith("t ") for line in lines) == mesh2.n_triangles
        assert lines[-1].startswith("b ")
