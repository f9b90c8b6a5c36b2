import math

import numpy as np
import pytest
import scipy.io
from numpy.testing import assert_allclose

from eigratio.eig import smallest_eigenpairs, solve_domain
from eigratio.errors import InvalidArgumentError, MeshTooCoarseError
from eigratio.fem import (assemble, boundary_normal_derivative, boundary_trace, export_pencil,
                          full_stiffness_mass, interpolate)
from eigratio.meshgen import Mesh, mesh_for, refine, triangulate


def centred_square():
    pts = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5)]
    tris = [(0, 1, 4), (1, 2, 4), (2, 3, 4), (3, 0, 4)]
    return Mesh(pts, tris, [True, True, True, True, False])


class TestAssemble:
    def test_single_interior_point(self):
        p = assemble(centred_square())
        assert p.n == 1
        assert_allclose(p.stiffness.toarray(), [[4.0]])
        assert_allclose(p.mass.toarray(), [[1.0 / 6.0]])
        assert list(p.interior) == [4]
        assert list(p.interior_index) == [-1, -1, -1, -1, 0]

    def test_row_sums_and_mass(self, unit_square):
        m = triangulate(unit_square, 0.2)
        k, mm = full_stiffness_mass(m)
        assert_allclose(np.asarray(k.sum(axis=1)).ravel(), 0.0, atol=1e-12)
        assert_allclose(mm.sum(), 1.0, atol=1e-10)

    def test_symmetric_positive(self, unit_square):
        p = assemble(triangulate(unit_square, 0.3))
        assert abs(p.stiffness - p.stiffness.T).max() < 1e-13
        assert abs(p.mass - p.mass.T).max() < 1e-15
        assert (p.stiffness.diagonal() > 0).all()

    def test_no_interior_point(self):
        m = Mesh([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], [(0, 1, 2)], [True] * 3)
        with pytest.raises(MeshTooCoarseError):
            assemble(m)

    def test_clockwise_triangle_rejected(self):
        m = Mesh([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.3, 0.3)], [(0, 2, 3), (0, 1, 3), (1, 2, 3)],
                 [True, True, True, False])
        with pytest.raises(InvalidArgumentError):
            assemble(m)

    def test_extend(self):
        p = assemble(centred_square())
        assert_allclose(p.extend([2.0]), [0, 0, 0, 0, 2.0])
        assert p.extend(np.ones((1, 3))).shape == (5, 3)


class TestRefinementNesting:
    def test_parent_hat_reproduced(self, unit_square):
        m = triangulate(unit_square, 0.3)
        fine = refine(m)
        edges, _, _ = m.edges()
        parents = m.points[m.triangles]
        children = fine.triangles.reshape(m.n_triangles, 4, 3)
        k_c, m_c = full_stiffness_mass(m)
        k_f, m_f = full_stiffness_mass(fine)
        for j in np.flatnonzero(~m.boundary_mask)[:5]:
            u = np.zeros(m.n_points)
            u[j] = 1.0
            v = np.concatenate([u, 0.5 * (u[edges[:, 0]] + u[edges[:, 1]])])
            # parent hat evaluated at every child vertex through barycentric coordinates
            for t in range(m.n_triangles):
                p0, p1, p2 = parents[t]
                q = fine.points[children[t].ravel()]
                l1, l2 = np.linalg.solve(np.column_stack([p1 - p0, p2 - p0]), (q - p0).T)
                hat = u[m.triangles[t]] @ np.vstack([1.0 - l1 - l2, l1, l2])
                assert np.abs(hat - v[children[t].ravel()]).max() <= 1e-12
            assert v @ (k_f @ v) == pytest.approx(u @ (k_c @ u), rel=1e-12)
            assert v @ (m_f @ v) == pytest.approx(u @ (m_c @ u), rel=1e-12)

    def test_eigenvalues_nonincreasing(self, unit_square):
        values = [smallest_eigenpairs(assemble(mesh_for(unit_square, level=level)), k=4).values
                  for level in range(4)]
        for coarse, finer in zip(values, values[1:]):
            assert (finer <= coarse * (1 + 1e-10)).all()
        assert values[-1][0] == pytest.approx(2 * math.pi ** 2, rel=0.02)


def test_assemble_triangle_order_invariant(unit_square):
    m = triangulate(unit_square, 0.2)
    rng = np.random.default_rng(3)
    tris = m.triangles[rng.permutation(m.n_triangles)]
    shift = rng.integers(0, 3, size=len(tris))
    tris = np.array([np.roll(t, s) for t, s in zip(tris, shift)])
    shuffled = Mesh(m.points, tris, m.boundary_mask, m.generation)
    a, b = assemble(m), assemble(shuffled)
    assert_allclose(b.stiffness.toarray(), a.stiffness.toarray(), atol=1e-12)
    assert_allclose(b.mass.toarray(), a.mass.toarray(), atol=1e-14)



def test_interpolate_linear(unit_square):
    m = triangulate(unit_square, 0.3)
    u = interpolate(m, lambda x, y: 2.0 * x - y)
    assert_allclose(u, 2.0 * m.points[:, 0] - m.points[:, 1])


class TestNormalDerivative:
    def test_linear_function_exact(self, unit_square):
        m = triangulate(unit_square, 0.3)
        trace = boundary_trace(m, interpolate(m, lambda x, y: 3.0 * x + y))
        assert_allclose(trace.dudn, trace.normals @ np.array([3.0, 1.0]), atol=1e-10)
        assert_allclose(np.linalg.norm(trace.normals, axis=1), 1.0)
        assert_allclose(trace.lengths.sum(), 4.0)

    def test_outward_normals(self, unit_square):
        m = triangulate(unit_square, 0.3)
        trace = boundary_trace(m, np.zeros(m.n_points))
        outward = trace.midpoints + 1e-3 * trace.normals
        assert not unit_square.contains(outward).any()
        assert_allclose(trace.dudn, 0.0)

    def test_first_eigenfunction_of_square(self, unit_square):
        sol = solve_domain(unit_square, level=3, k=1)
        trace = boundary_trace(sol.mesh, sol.spectrum.vectors[:, 0])
        bottom = np.isclose(trace.normals[:, 1], -1.0)
        x = trace.midpoints[bottom, 0]
        exact = -2.0 * math.pi * np.sin(math.pi * x)
        total = np.sum(trace.dudn[bottom] * trace.lengths[bottom])
        assert total == pytest.approx(-4.0, rel=0.03)
        inner = np.abs(np.sin(math.pi * x)) > 0.3
        rel = np.abs(trace.dudn[bottom][inner] - exact[inner]) / np.abs(exact[inner])
        assert np.median(rel) < 0.1

    def test_dilation_scaling(self, unit_square):
        m = triangulate(unit_square, 0.3)
        u = interpolate(m, lambda x, y: x * y * (1 - x) * (1 - y))
        big = m.with_points(2.0 * m.points)
        # the renormalised eigenfunction on the dilated domain is u / t; its gradient carries another 1/t
        a = boundary_trace(m, u).dudn
        b = boundary_trace(big, u / 2.0).dudn
        assert_allclose(b, a / 4.0, atol=1e-12)

    def test_single_edge(self):
        m = centred_square()
        u = np.array([0.0, 0.0, 0.0, 0.0, 1.0])
        assert boundary_normal_derivative(m, u, (0, 1)) == pytest.approx(-2.0)
        with pytest.raises(InvalidArgumentError):
            boundary_normal_derivative(m, u, (0, 2))

    def test_interior_length_vector(self):
        m = centred_square()
        assert boundary_normal_derivative(m, [1.0], (1, 0)) == pytest.approx(-2.0)
        with pytest.raises(InvalidArgumentError):
            boundary_trace(m, [1.0, 2.0])


def test_export_pencil(tmp_path, unit_square):
    p = assemble(triangulate(unit_square, 0.3))
    prefix = str(tmp_path / 'square')
    export_pencil(p, prefix)
    k = scipy.io.mmread(prefix + '_K.mtx')
    mm = scipy.io.mmread(prefix + '_M.mtx')
    assert_allclose(k.toarray(), p.stiffness.toarray(), rtol=1e-12, atol=1e-14)
    assert_allclose(mm.toarray(), p.mass.toarray(), rtol=1e-12, atol=1e-14)
