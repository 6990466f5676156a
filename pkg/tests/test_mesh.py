"""Mesh construction, CG numbering, DSS, faces, filter width."""
import numpy as np
import pytest

from swsolver.basis import make_basis
from swsolver.mesh import Mesh, build_mesh


class TestBuild1D:
    def test_two_linear_elements_three_cg_dofs(self):
        mesh = Mesh(make_basis(1), [(-1.0, 1.0)], (2,))
        assert mesh.n_global == 3
        # CG DOF coordinates are {-1, 0, 1}
        coords = np.zeros(mesh.n_global)
        coords[mesh.cg_id] = mesh.x
        np.testing.assert_allclose(np.sort(coords), [-1.0, 0.0, 1.0])

    def test_rejects_bad_inputs(self):
        b = make_basis(2)
        with pytest.raises(ValueError):
            Mesh(b, [(0.0, 1.0)], (0,))
        with pytest.raises(ValueError):
            Mesh(b, [(1.0, 1.0)], (4,))
        with pytest.raises(ValueError):
            Mesh(b, [(0.0, np.inf)], (4,))
        with pytest.raises(ValueError):
            Mesh(b, [(0.0, 1.0)], (2,), bc={"top": "wall"})

    def test_node_coordinates_match_lgl_images(self):
        b = make_basis(3)
        mesh = Mesh(b, [(0.0, 2.0)], (4,))
        assert mesh.dx == 0.5
        np.testing.assert_allclose(
            mesh.x[1], 0.5 + 0.25 * (b.nodes + 1.0), atol=1e-14)


class TestBuild2D:
    def test_global_dof_count(self):
        mesh = Mesh(make_basis(4), [(0.0, 1.0), (0.0, 1.0)], (2, 2))
        assert mesh.n_global == (2 * 4 + 1) ** 2  # 81

    def test_face_counts(self):
        mesh = Mesh(make_basis(2), [(0.0, 1.0), (0.0, 1.0)], (2, 2))
        faces = mesh.faces
        interior = [f for f in faces if f.boundary is None]
        boundary = [f for f in faces if f.boundary is not None]
        assert len(interior) == 4
        assert len(boundary) == 8

    def test_interior_faces_consistent_orientation(self):
        mesh = Mesh(make_basis(2), [(0.0, 1.0), (0.0, 1.0)], (3, 2))
        seen = set()
        for f in mesh.faces:
            if f.boundary is None:
                key = (f.elem_l, f.face_l, f.elem_r, f.face_r)
                assert key not in seen
                seen.add(key)
                assert f.elem_l != f.elem_r


class TestDss:
    def test_multiplicity_1d(self):
        mesh = Mesh(make_basis(1), [(-1.0, 1.0)], (2,))
        out = mesh.dss(np.ones(mesh.elem_shape))
        np.testing.assert_allclose(np.sort(out), [1.0, 1.0, 2.0])

    def test_corner_multiplicity_2d(self):
        mesh = Mesh(make_basis(2), [(0.0, 1.0), (0.0, 1.0)], (2, 2))
        mult = mesh.dss(np.ones(mesh.elem_shape))
        # the centre global node is shared by 4 elements
        assert np.max(mult) == 4.0

    def test_linearity(self):
        mesh = Mesh(make_basis(3), [(0.0, 1.0)], (4,))
        rng = np.random.default_rng(3)
        u = rng.standard_normal(mesh.elem_shape)
        v = rng.standard_normal(mesh.elem_shape)
        np.testing.assert_allclose(
            mesh.dss(2.0 * u - 3.0 * v),
            2.0 * mesh.dss(u) - 3.0 * mesh.dss(v), atol=1e-12)

    def test_scatter_then_gather_weights_by_multiplicity(self):
        mesh = Mesh(make_basis(2), [(0.0, 1.0)], (3,))
        rng = np.random.default_rng(5)
        g = rng.standard_normal(mesh.n_global)
        back = mesh.dss(mesh.gather(g))
        np.testing.assert_allclose(back, g * mesh.multiplicity, atol=1e-13)

    def test_shape_mismatch_rejected(self):
        mesh = Mesh(make_basis(2), [(0.0, 1.0)], (3,))
        with pytest.raises(ValueError):
            mesh.dss(np.ones((3, 2)))


class TestFilterWidth:
    def test_square_elements(self):
        mesh = Mesh(make_basis(4), [(0.0, 1.0), (0.0, 1.0)], (2, 2))
        np.testing.assert_allclose(mesh.filter_width(), 0.5 / 5.0)

    def test_min_rule(self):
        mesh = Mesh(make_basis(3), [(0.0, 0.4), (0.0, 0.8)], (2, 2))
        # dx=0.2, dy=0.4 -> min/(N+1) = 0.05
        np.testing.assert_allclose(mesh.filter_width(), 0.05)

    def test_1d(self):
        mesh = Mesh(make_basis(4), [(0.0, 10.0)], (1,))
        np.testing.assert_allclose(mesh.filter_width(), 2.0)


class TestOperators:
    def test_quad_weights_integrate_area(self):
        mesh = Mesh(make_basis(3), [(0.0, 2.0), (0.0, 3.0)], (3, 2))
        np.testing.assert_allclose(np.sum(mesh.quad_weights()), 6.0, atol=1e-12)

    def test_deriv_1d_polynomial(self):
        mesh = Mesh(make_basis(4), [(0.0, 2.0)], (3,))
        f = mesh.x**3
        np.testing.assert_allclose(mesh.deriv(f), 3 * mesh.x**2, atol=1e-10)

    def test_deriv_2d_both_axes(self):
        mesh = Mesh(make_basis(3), [(0.0, 1.0), (0.0, 1.0)], (2, 2))
        f = mesh.x**2 * mesh.y
        np.testing.assert_allclose(mesh.deriv(f, 0), 2 * mesh.x * mesh.y,
                                   atol=1e-10)
        np.testing.assert_allclose(mesh.deriv(f, 1), mesh.x**2, atol=1e-10)

    def test_cg_average_idempotent(self):
        mesh = Mesh(make_basis(3), [(0.0, 1.0)], (4,))
        rng = np.random.default_rng(11)
        f = rng.standard_normal(mesh.elem_shape)
        once = mesh.cg_average(f)
        np.testing.assert_allclose(mesh.cg_average(once), once, atol=1e-13)

    def test_paired_face_normals_opposite(self):
        mesh = Mesh(make_basis(2), [(0.0, 1.0), (0.0, 1.0)], (2, 2))
        for f in mesh.faces:
            if f.boundary is None:
                # the stored normal is outward from the left element; the
                # right element's outward normal at the same face is its
                # negation by construction of the structured pairing
                assert abs(np.linalg.norm(f.normal) - 1.0) < 1e-14


def test_build_mesh_wrapper():
    mesh = build_mesh(make_basis(2), [(0.0, 1.0)], (4,))
    assert mesh.nelem == 4
