import math

import numpy as np
import pytest
import scipy.sparse as sp
from numpy.testing import assert_allclose

from eigratio.analytic import bessel_zero
from eigratio.eig import Spectrum, smallest_eigenpairs, solve_domain
from eigratio.errors import InvalidArgumentError
from eigratio.fem import assemble
from eigratio.geometry import make_disk
from eigratio.meshgen import triangulate

PI2 = math.pi ** 2


@pytest.fixture(scope='module')
def square_pencil():
    from eigratio.geometry import make_rectangle
    from eigratio.meshgen import mesh_for
    return assemble(mesh_for(make_rectangle(1.0), level=2))


def test_diagonal_pencil():
    s = smallest_eigenpairs((sp.diags([2.0, 6.0]), sp.identity(2)), k=2)
    assert_allclose(s.values, [2.0, 6.0])
    assert_allclose(np.abs(s.vectors), np.eye(2), atol=1e-12)


def test_invalid_arguments(square_pencil):
    with pytest.raises(InvalidArgumentError):
        smallest_eigenpairs(square_pencil, k=0)
    with pytest.raises(InvalidArgumentError):
        smallest_eigenpairs(square_pencil, k=square_pencil.n + 1)
    with pytest.raises(InvalidArgumentError):
        smallest_eigenpairs(square_pencil, k=4, tol=0.0)


class TestSquare:
    def test_values(self, square_pencil):
        s = smallest_eigenpairs(square_pencil, k=4)
        assert s.k == 4
        assert (np.diff(s.values) >= 0).all()
        assert_allclose(s.values, [2 * PI2, 5 * PI2, 5 * PI2, 8 * PI2], rtol=0.02)
        assert (s.residuals <= 1e-8 * np.maximum(1.0, s.values)).all()

    def test_m_orthonormal(self, square_pencil):
        s = smallest_eigenpairs(square_pencil, k=4)
        gram = s.vectors.T @ (square_pencil.mass @ s.vectors)
        assert_allclose(gram, np.eye(4), atol=1e-8)

    def test_rayleigh_quotients(self, square_pencil):
        s = smallest_eigenpairs(square_pencil, k=4)
        for lam, v in zip(s.values, s.vectors.T):
            rq = v @ (square_pencil.stiffness @ v) / (v @ (square_pencil.mass @ v))
            assert abs(rq - lam) <= 10 * 1e-8 * lam

    def test_double_eigenvalue_not_skipped(self, square_pencil):
        s = smallest_eigenpairs(square_pencil, k=3)
        assert s.values[2] == pytest.approx(s.values[1], rel=1e-2)
        assert s.values[1] > 2 * s.values[0]

    def test_deterministic(self, square_pencil):
        a = smallest_eigenpairs(square_pencil, k=4)
        b = smallest_eigenpairs(square_pencil, k=4)
        assert_allclose(a.values, b.values, rtol=1e-12)

    def test_permutation_invariance(self, square_pencil):
        perm = np.random.default_rng(0).permutation(square_pencil.n)
        k = square_pencil.stiffness[perm][:, perm]
        m = square_pencil.mass[perm][:, perm]
        a = smallest_eigenpairs(square_pencil, k=4)
        b = smallest_eigenpairs((k, m), k=4)
        assert_allclose(b.values, a.values, rtol=1e-9)

    def test_dilation(self, unit_square):
        m = triangulate(unit_square, 0.2)
        a = smallest_eigenpairs(assemble(m), k=3)
        b = smallest_eigenpairs(assemble(m.with_points(3.0 * m.points)), k=3)
        assert_allclose(b.values, a.values / 9.0, rtol=1e-9)
        assert_allclose(b.ratios(), a.ratios(), rtol=1e-9)


def test_spectrum_ratios_and_delta4():
    s = Spectrum(np.array([2.0, 4.0, 6.0, 9.0]), np.zeros((1, 4)), np.zeros(4))
    assert s.ratios() == (2.0, 3.0)
    assert s.delta4() == pytest.approx(0.5)


class TestSolveDomain:
    @pytest.mark.slow
    def test_square_level3(self, unit_square):
        sol = solve_domain(unit_square, level=3)
        assert sol.values[0] == pytest.approx(2 * PI2, rel=3e-3)
        assert sol.level == 3
        assert sol.pencil.n == int((~sol.mesh.boundary_mask).sum())

    def test_extrapolation_improves(self, unit_square):
        sol = solve_domain(unit_square, level=2, k=1, extrapolate=True)
        assert sol.coarse_values is not None
        raw = abs(sol.values[0] - 2 * PI2)
        extrapolated = abs(sol.extrapolated[0] - 2 * PI2)
        assert extrapolated < raw
        assert sol.values[0] > 2 * PI2

    def test_no_extrapolation(self, unit_square):
        assert solve_domain(unit_square, level=1, k=1).extrapolated is None
        with pytest.raises(InvalidArgumentError):
            solve_domain(unit_square, level=0, extrapolate=True)

    @pytest.mark.slow
    def test_disk(self):
        sol = solve_domain(make_disk(256), level=3, k=1)
        assert sol.values[0] == pytest.approx(bessel_zero(0, 1) ** 2, rel=1e-2)
