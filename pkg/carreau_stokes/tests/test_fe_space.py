"""
Tests for Taylor-Hood spaces, DOF numbering, interpolation and norms
"""

import numpy as np
import pytest

from ..fe_space import (FeSpace, build_spaces, check_compatible, default_exactness, integrate, lp_norm,
                        vector_magnitude)
from ..mesh import unit_square_mesh
from ..stokes_types import BasisError, MeshMismatchError


class TestBuildSpaces:
    def test_p2_dof_counts(self, spaces2):
        # 9 vertices, 16 edges, 8 triangles
        assert spaces2.ndofs == (2 * 25, 9, 25)
        assert spaces2.degree == 2

    def test_p3_dof_counts(self, mesh2):
        spaces = build_spaces(mesh2, 3)
        assert spaces.ndofs == (2 * 49, 25, 49)

    @pytest.mark.parametrize("degree", [1, 4])
    def test_unsupported_degree(self, mesh2, degree):
        with pytest.raises(BasisError):
            build_spaces(mesh2, degree)

    def test_default_exactness(self):
        assert default_exactness(2) == 8
        assert default_exactness(3) == 10

    def test_shared_rule(self, spaces2):
        assert spaces2.velocity.rule is spaces2.pressure.rule is spaces2.temperature.rule

    def test_cell_dofs_cover_all_dofs(self, spaces4):
        T = spaces4.temperature
        assert set(np.unique(T.cell_dofs)) == set(range(T.n_scalar))

    def test_edge_dofs_agree_between_neighbours(self, mesh4):
        # each shared P3 edge node must sit at the same physical point from both sides
        space = FeSpace(mesh4, 3)
        nodes = space.basis.node_coords
        v = mesh4.vertices[mesh4.triangles]
        physical = (v[:, :1] + nodes[None, :, :1] * (v[:, 1:2] - v[:, :1])
                    + nodes[None, :, 1:] * (v[:, 2:3] - v[:, :1]))
        assert np.allclose(space.dof_coords[space.cell_dofs], physical)

    def test_boundary_dofs(self, spaces2):
        V, T = spaces2.velocity, spaces2.temperature
        assert len(T.boundary_scalar_dofs) == 16
        assert len(V.boundary_dofs) == 32
        coords = T.boundary_coords
        on_boundary = np.isclose(coords, 0.0) | np.isclose(coords, 1.0)
        assert np.all(on_boundary.any(axis=1))

    def test_incompatible_meshes(self, spaces2):
        other = build_spaces(unit_square_mesh(2), 2)
        with pytest.raises(MeshMismatchError):
            check_compatible(spaces2.velocity, other.temperature)


class TestInterpolation:
    def test_quadratic_reproduced_at_quadrature_points(self, spaces4):
        T = spaces4.temperature

        def func(x, y):
            return x * x + 3 * x * y - y + 1

        coeffs = T.interpolate(func)
        pts = T.tab.points
        assert np.allclose(T.values(coeffs), func(pts[..., 0], pts[..., 1]))

    def test_vector_gradients(self, spaces2):
        V = spaces2.velocity
        coeffs = V.interpolate(lambda x, y: np.stack([2 * x + y, 3 * x - y]))
        grads = V.gradients(coeffs)
        assert np.allclose(grads, [[2.0, 1.0], [3.0, -1.0]])

    def test_rigid_rotation_has_zero_strain(self, spaces2):
        V = spaces2.velocity
        coeffs = V.interpolate(lambda x, y: np.stack([y, -x]))
        assert np.allclose(V.strain(coeffs), 0.0, atol=1e-13)

    def test_strain_requires_vector_space(self, spaces2):
        with pytest.raises(BasisError):
            spaces2.temperature.strain(np.zeros(spaces2.temperature.ndof))

    def test_evaluate_at(self, spaces4):
        T = spaces4.temperature
        coeffs = T.interpolate(lambda x, y: x * y)
        rng = np.random.default_rng(1)
        points = rng.uniform(0, 1, size=(30, 2))
        assert np.allclose(T.evaluate_at(coeffs, points), points[:, 0] * points[:, 1])

    def test_evaluate_vector_at(self, spaces4):
        V = spaces4.velocity
        coeffs = V.interpolate(lambda x, y: np.stack([x * x, -y]))
        values = V.evaluate_at(coeffs, np.array([[0.3, 0.6]]))
        assert np.allclose(values, [[0.09, -0.6]])

    def test_wrong_coefficient_length(self, spaces2):
        with pytest.raises(MeshMismatchError):
            spaces2.pressure.values(np.zeros(3))


class TestNorms:
    def test_integrate_area(self, spaces2):
        tab = spaces2.temperature.tab
        assert integrate(tab, np.ones_like(tab.wdet)) == pytest.approx(1.0, abs=1e-14)

    def test_lp_norm_of_constant_vector(self, spaces2):
        V = spaces2.velocity
        coeffs = V.interpolate(lambda x, y: np.stack([np.full_like(x, 3.0), np.full_like(x, 4.0)]))
        magnitude = vector_magnitude(V.values(coeffs))
        assert lp_norm(V.tab, magnitude, 2.0) == pytest.approx(5.0)
        assert lp_norm(V.tab, magnitude, 1.6) == pytest.approx(5.0)
