import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from eigratio.analytic import rectangle_modes
from eigratio.eig import solve_domain
from eigratio.errors import DegenerateEigenvalueError, InvalidArgumentError
from eigratio.geometry import SQRT_8_3, make_rectangle
from eigratio.meshgen import mesh_for, triangulate
from eigratio.perturb import (COSINE_SLOPE, MeshField, RectangleField, clusters, cosine_field, f_pq, fem_slopes,
                              first_order, first_order_double, first_order_simple, mesh_f_matrix, mesh_first_order,
                              quadrilateral_tangency_check, ratio_slope, rectangle_cosine_check,
                              rectangle_f_pq, rectangle_first_order)

PI2 = math.pi ** 2


class TestRectangleField:
    def test_profiles(self):
        f = RectangleField(2.0, (0.5,), (1.0, 2.0, 3.0))
        assert f.profile('bottom') == (1.0, 2.0, ())
        assert f.profile('top') == (7.0, 2.0, (0.5,))
        assert f.profile('left') == (1.0, 6.0, ())
        assert f.profile('right') == (3.0, 6.0, ())
        with pytest.raises(InvalidArgumentError):
            f.profile('front')

    def test_edge_values_match_linear_function(self):
        f = RectangleField(2.0, (), (1.0, 2.0, 3.0))
        s = np.linspace(0, 1, 5)
        assert_allclose(f.edge_values('top', s), 1.0 + 2.0 * s + 3.0 * 2.0)
        assert_allclose(f.edge_values('right', s), 1.0 + 2.0 + 3.0 * 2.0 * s)

    def test_cosine_profile(self):
        f = RectangleField(1.0, (1.0, 0.0, 2.0))
        assert_allclose(f.g([0.0, 0.5]), [1.0 + 2.0 * math.sqrt(2), 1.0 - 2.0 * math.sqrt(2)])

    def test_displacement_normal_component(self):
        f = RectangleField(2.0, (0.2, 0.1), (0.3, -0.2, 0.5))
        t = np.linspace(0, 1, 7)
        bottom = f.displacement(np.column_stack([t, np.zeros_like(t)]))
        top = f.displacement(np.column_stack([t, np.full_like(t, 2.0)]))
        left = f.displacement(np.column_stack([np.zeros_like(t), 2.0 * t]))
        right = f.displacement(np.column_stack([np.ones_like(t), 2.0 * t]))
        assert_allclose(-bottom[:, 1], f.edge_values('bottom', t))
        assert_allclose(top[:, 1], f.edge_values('top', t))
        assert_allclose(-left[:, 0], f.edge_values('left', t))
        assert_allclose(right[:, 0], f.edge_values('right', t))

    def test_arithmetic(self):
        f = RectangleField(1.5, (1.0,), (1.0, 0.0, 0.0))
        g = RectangleField(1.5, (0.0, 2.0), (0.0, 1.0, 0.0))
        h = f + 2 * g
        assert h.cos == (1.0, 4.0)
        assert h.linear == (1.0, 2.0, 0.0)

    def test_validation(self):
        with pytest.raises(InvalidArgumentError):
            RectangleField(0.5)
        with pytest.raises(InvalidArgumentError):
            RectangleField(1.0, (0.0,) * 6)
        with pytest.raises(InvalidArgumentError):
            RectangleField(1.0, (math.nan,))


class TestClosedForm:
    @pytest.mark.parametrize('a', [1.0, SQRT_8_3, 2.5])
    def test_top_edge_unit_field(self, a):
        f = RectangleField(a, (1.0,))
        assert rectangle_f_pq(a, (1, 1), (1, 1), f) == pytest.approx(2 * PI2 / a ** 3)

    def test_zero_field(self):
        f = RectangleField(2.0)
        assert rectangle_f_pq(2.0, (1, 2), (2, 1), f) == 0.0

    def test_uniform_offset_square(self):
        c = 0.7
        f = RectangleField(1.0, (), (c, 0.0, 0.0))
        assert rectangle_f_pq(1.0, (1, 1), (1, 1), f) == pytest.approx(8 * PI2 * c)
        fo = rectangle_first_order(1.0, f)
        assert fo.corrections[0] == pytest.approx(-8 * PI2 * c)

    @pytest.mark.parametrize('a', [1.2, 2.0])
    def test_linear_field_acts_as_offset(self, a):
        p, q, r = 0.3, -0.2, 0.5
        linear = RectangleField(a, (), (p, q, r))
        offset = RectangleField(a, (), ((2 * p + q + r * a) / 2, 0.0, 0.0))
        for _, m, n in rectangle_modes(a, 4):
            assert rectangle_f_pq(a, (m, n), (m, n), linear) == pytest.approx(
                rectangle_f_pq(a, (m, n), (m, n), offset), rel=1e-12)

    def test_symmetric_and_linear(self):
        rng = np.random.default_rng(3)
        a = 1.7
        modes = [(m, n) for _, m, n in rectangle_modes(a, 6)]
        f = RectangleField(a, tuple(rng.normal(size=5)), tuple(rng.normal(size=3)))
        g = RectangleField(a, tuple(rng.normal(size=3)), tuple(rng.normal(size=3)))
        for p in modes:
            for q in modes:
                assert rectangle_f_pq(a, p, q, f) == rectangle_f_pq(a, q, p, f)
                combined = rectangle_f_pq(a, p, q, f + 3.0 * g)
                expected = rectangle_f_pq(a, p, q, f) + 3.0 * rectangle_f_pq(a, p, q, g)
                assert combined == pytest.approx(expected, rel=1e-12, abs=1e-9)

    def test_f_pq_dispatch(self):
        f = RectangleField(2.0, (1.0,))
        assert f_pq(2.0, (1, 1), (1, 1), f) == rectangle_f_pq(2.0, (1, 1), (1, 1), f)
        with pytest.raises(InvalidArgumentError):
            rectangle_f_pq(1.0, (1, 1), (1, 1), f)
        with pytest.raises(InvalidArgumentError):
            rectangle_f_pq(2.0, (1, 1), (1, 1), lambda x, y: x)


class TestMeshIntegrals:
    def test_field_kinds_agree_for_linear_function(self, unit_square):
        sol = solve_domain(unit_square, level=1, k=2)
        m, v = sol.mesh, sol.spectrum.vectors
        fn = lambda x, y: 1.0 + 0.5 * x - 0.25 * y
        a = mesh_f_matrix(m, v, RectangleField(1.0, (), (1.0, 0.5, -0.25)))
        b = mesh_f_matrix(m, v, MeshField.from_function(m, fn))
        c = mesh_f_matrix(m, v, fn)
        assert_allclose(a, b, rtol=1e-10, atol=1e-10)
        assert_allclose(a, c, rtol=1e-10, atol=1e-10)
        assert_allclose(a, a.T)
        assert f_pq(m, v[:, 0], v[:, 1], fn) == pytest.approx(a[0, 1], rel=1e-10, abs=1e-10)

    def test_mesh_field_length(self, unit_square):
        m = triangulate(unit_square, 0.3)
        v = np.zeros((int((~m.boundary_mask).sum()), 1))
        with pytest.raises(InvalidArgumentError):
            mesh_f_matrix(m, v, MeshField(np.zeros(3)))
        with pytest.raises(InvalidArgumentError):
            mesh_f_matrix(m, v, 'not a field')

    @pytest.mark.slow
    def test_discrete_matches_closed_form(self, degenerate_rectangle):
        field = cosine_field(0.1, 0.3, 0.5)
        sol = solve_domain(degenerate_rectangle, level=3, k=2)
        fm = mesh_f_matrix(sol.mesh, sol.spectrum.vectors, field)
        for j, (_, m, n) in enumerate(rectangle_modes(SQRT_8_3, 2)):
            assert fm[j, j] == pytest.approx(rectangle_f_pq(SQRT_8_3, (m, n), (m, n), field), rel=0.05)


class TestFirstOrder:
    def test_simple(self):
        assert first_order_simple([1.0, 2.0, 3.0], 1, 0.5) == -0.5
        with pytest.raises(DegenerateEigenvalueError):
            first_order_simple([1.0, 2.0, 2.0], 1, 0.5)

    def test_outward_bulge_lowers(self, unit_square):
        sol = solve_domain(unit_square, level=1, k=1)
        fm = mesh_f_matrix(sol.mesh, sol.spectrum.vectors, lambda x, y: 1.0 + x * x)
        assert first_order_simple(sol.values, 0, fm[0, 0]) < 0

    def test_double(self):
        assert first_order_double(2.0, 2.0, 0.0) == (-2.0, -2.0)
        assert first_order_double(0.0, 0.0, 3.0) == (-3.0, 3.0)
        mu1, mu2 = first_order_double(1.0, 4.0, 2.0)
        assert (mu1 + 1.0) * (mu1 + 4.0) - 4.0 == pytest.approx(0.0, abs=1e-12)
        assert mu1 <= mu2

    def test_ratio_slope(self):
        assert ratio_slope(1.0, 0.0, 3.0, 1.0) == 1.0
        assert ratio_slope(2.0, -1.0, 6.0, -3.0) == 0.0
        with pytest.raises(InvalidArgumentError):
            ratio_slope(0.0, 1.0, 1.0, 1.0)

    def test_clusters(self):
        assert clusters([1.0, 2.0, 2.0, 3.0]) == [(0,), (1, 2), (3,)]
        assert clusters([1.0, 1.0 + 1e-3], gap_tol_rel=1e-2) == [(0, 1)]

    def test_sign_reverses_roots(self):
        values = [1.0, 2.0, 2.0]
        fm = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
        plus = first_order(values, fm, k=3, sign=1)
        minus = first_order(values, fm, k=3, sign=-1)
        assert_allclose(plus.corrections, [-1.0, -1.0, 1.0])
        assert_allclose(minus.corrections, [-1.0, 1.0, -1.0])
        with pytest.raises(InvalidArgumentError):
            first_order(values, fm, sign=0)

    def test_triple_cluster(self):
        fm = np.diag([1.0, 3.0, 2.0])
        fo = first_order([5.0, 5.0, 5.0], fm, k=3)
        assert_allclose(fo.corrections, [-3.0, -2.0, -1.0])
        assert fo.clusters == ((0, 1, 2),)


class TestCosineCheck:
    def test_positive_slope(self):
        report = rectangle_cosine_check(0.0, 0.0, 1.0)
        assert report['slope'] == pytest.approx(1.37419, abs=1e-5)
        assert report['slope'] == pytest.approx(COSINE_SLOPE)
        assert report['double_preserved']
        assert report['slope_matches']
        assert report['coefficients']['c4'] == pytest.approx(9.0)
        assert report['F']['F33'] == pytest.approx(report['F']['F44'])
        c = report['corrections']
        assert c[2] == pytest.approx(c[3], abs=1e-10 * max(map(abs, c)))

    def test_zero_slope(self):
        report = rectangle_cosine_check(1 / math.sqrt(2), 0.0, 1.0)
        assert report['slope'] == pytest.approx(0.0, abs=1e-12)
        assert report['first_order_slope'] == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize('seed', range(5))
    def test_random_coefficients(self, seed):
        c0, c1, c2 = np.random.default_rng(seed).normal(size=3)
        report = rectangle_cosine_check(c0, c1, c2)
        assert report['double_preserved']
        assert report['slope_matches']

    def test_cosine_field(self):
        f = cosine_field(0.1, 0.2, 0.3)
        assert f.a == SQRT_8_3
        assert f.cos[3] == 0.2
        assert f.cos[4] == pytest.approx(2.7 - 0.8 * math.sqrt(2))

    @pytest.mark.slow
    def test_fem_witness(self):
        report = rectangle_cosine_check(0.0, 0.0, 1.0, fem=True, eps=1e-3, level=3)
        assert report['fem_matches']
        assert report['witness']
        assert report['y_plus'] > 35 / 11
        assert report['y_zero'] == pytest.approx(35 / 11, rel=5e-3)


@pytest.fixture(scope='module')
def degenerate_mesh():
    return mesh_for(make_rectangle(SQRT_8_3), 3)


@pytest.mark.slow
@pytest.mark.parametrize('seed', range(20))
def test_fem_slopes_match_first_order(degenerate_mesh, seed):
    field = cosine_field(*np.random.default_rng(seed).normal(size=3))
    fo = rectangle_first_order(SQRT_8_3, field)
    s = fem_slopes(field, eps=1e-3, mesh=degenerate_mesh)
    scale = np.abs(fo.corrections).max()
    for j, rel in enumerate((0.02, 0.02, 0.05, 0.05)):
        assert s.central[j] == pytest.approx(fo.corrections[j], rel=rel, abs=2e-3 * scale)


@pytest.mark.slow
def test_mesh_first_order_matches_closed_form(degenerate_rectangle):
    field = cosine_field(0.4, -0.2, 0.3)
    sol = solve_domain(degenerate_rectangle, level=3, k=4)
    fo = rectangle_first_order(SQRT_8_3, field)
    discrete = mesh_first_order(sol.mesh, sol.spectrum, field, gap_tol_rel=1e-2)
    scale = np.abs(fo.corrections).max()
    assert_allclose(discrete.values, fo.values, rtol=0.01)
    assert_allclose(discrete.corrections, fo.corrections, rtol=0.05, atol=2e-3 * scale)


class TestTangency:
    @pytest.mark.parametrize('field', [(1.0, 0.0, 0.0), (0.3, -0.2, 0.5), (0.0, 1.0, 0.0)])
    def test_long_rectangle(self, field):
        report = quadrilateral_tangency_check(2.0, *field)
        assert not report['double']
        assert report['curve_slope'] == pytest.approx(8 / 3)
        if report['dydx'] is not None:
            assert report['dydx'] == pytest.approx(8 / 3, abs=1e-8)
        assert report['tangent']

    @pytest.mark.parametrize('field', [(1.0, 0.0, 0.0), (0.3, -0.2, 0.5), (0.0, 0.0, 1.0)])
    def test_short_rectangle(self, field):
        report = quadrilateral_tangency_check(1.2, *field)
        assert report['curve_slope'] == -1.0
        if report['dydx'] is not None:
            assert report['dydx'] == pytest.approx(-1.0, abs=1e-8)
        assert report['tangent']

    def test_zero_field(self):
        report = quadrilateral_tangency_check(2.0)
        assert report['x_eps'] == report['x']
        assert report['y_eps'] == report['y']
        assert report['x'] == pytest.approx(1.6)
        assert report['y'] == pytest.approx(2.6)

    def test_degenerate_rectangle(self):
        report = quadrilateral_tangency_check(SQRT_8_3, p=1.0)
        assert report['double']
        assert report['below_curve']
        assert report['tangent']

    def test_shear_splits_pair(self):
        q = 0.5
        report = quadrilateral_tangency_check(SQRT_8_3, q=q)
        assert report['double']
        assert report['F_pair'] == pytest.approx(-64.0 / 3.0 * q / SQRT_8_3 ** 3, rel=1e-10)
        assert not report['tangent']
        assert report['below_curve']
