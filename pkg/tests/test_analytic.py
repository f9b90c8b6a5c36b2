import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from eigratio.analytic import (bessel_j, bessel_zero, circles_curve, disjoint_union_ratios, disk_spectrum, k2,
                               merge_spectra, rectangle_curve, rectangle_modes, rectangle_spectrum)
from eigratio.errors import InvalidArgumentError, NumericalError

PI2 = math.pi ** 2


class TestBessel:
    def test_values_at_zero(self):
        assert bessel_j(0, 0.0) == 1.0
        assert bessel_j(1, 0.0) == 0.0

    def test_first_zero(self):
        assert abs(bessel_j(0, 2.404825557695773)) < 1e-10
        assert bessel_zero(0, 1) == pytest.approx(2.40482555770, abs=1e-10)
        assert bessel_zero(1, 1) == pytest.approx(3.83170597021, abs=1e-10)
        assert bessel_zero(0, 2) == pytest.approx(5.52007811029, abs=1e-10)

    def test_half_integer_order(self):
        t = 1.3
        assert bessel_j(0.5, t) == pytest.approx(math.sqrt(2 / (math.pi * t)) * math.sin(t), rel=1e-12)
        assert bessel_zero(0.5, 1) == pytest.approx(math.pi, abs=1e-12)

    def test_array_argument(self):
        assert_allclose(bessel_j(0, np.array([0.0, 0.0])), [1.0, 1.0])

    def test_unsupported(self):
        with pytest.raises(InvalidArgumentError):
            bessel_j(0.3, 1.0)
        with pytest.raises(InvalidArgumentError):
            bessel_j(-1, 1.0)
        with pytest.raises(InvalidArgumentError):
            bessel_j(0, -1.0)
        with pytest.raises(InvalidArgumentError):
            bessel_zero(0, 0)

    def test_k2(self):
        assert k2() == pytest.approx(2.5387, abs=5e-5)
        assert issubclass(NumericalError, ArithmeticError)


class TestRectangle:
    def test_square(self):
        assert_allclose(rectangle_spectrum(1.0, 3), [2 * PI2, 5 * PI2, 5 * PI2])
        assert [mn[1:] for mn in rectangle_modes(1.0, 3)] == [(1, 1), (1, 2), (2, 1)]

    def test_degenerate_rectangle(self):
        lam = rectangle_spectrum(math.sqrt(8 / 3), 4)
        assert lam[1] / lam[0] == pytest.approx(20 / 11)
        assert lam[2] / lam[0] == pytest.approx(35 / 11)
        assert lam[3] == pytest.approx(lam[2], rel=1e-14)

    def test_a2(self):
        lam = rectangle_spectrum(2.0, 3)
        assert lam[1] / lam[0] == pytest.approx(1.6)
        assert lam[2] / lam[0] == pytest.approx(2.6)

    def test_long_rectangle_certified(self):
        lam = rectangle_spectrum(20.0, 30)
        m, n = np.meshgrid(np.arange(1, 40), np.arange(1, 400), indexing='ij')
        brute = np.sort((PI2 * (m ** 2 + n ** 2 / 400.0)).ravel())[:30]
        assert_allclose(lam, brute)

    def test_rejects(self):
        with pytest.raises(InvalidArgumentError):
            rectangle_spectrum(0.5, 3)
        with pytest.raises(InvalidArgumentError):
            rectangle_spectrum(1.0, 0)

    def test_curve(self):
        assert rectangle_curve(20 / 11) == pytest.approx(35 / 11)
        assert rectangle_curve(1.0) == pytest.approx(1.0)
        assert rectangle_curve(2.5) == pytest.approx(2.5)
        with pytest.raises(InvalidArgumentError):
            rectangle_curve(2.6)

    @pytest.mark.parametrize('a', np.linspace(1.0, 6.0, 26))
    def test_spectrum_on_curve(self, a):
        lam = rectangle_spectrum(a, 3)
        x, y = lam[1] / lam[0], lam[2] / lam[0]
        assert y == pytest.approx(rectangle_curve(x), rel=1e-12)


class TestCircles:
    def test_curve(self):
        assert circles_curve(1.0) == pytest.approx(2.5387, abs=5e-5)
        assert circles_curve(k2()) == k2()
        with pytest.raises(InvalidArgumentError):
            circles_curve(3.0)

    def test_disk_spectrum(self):
        j01, j11, j21, j02 = bessel_zero(0, 1), bessel_zero(1, 1), bessel_zero(2, 1), bessel_zero(0, 2)
        assert_allclose(disk_spectrum(6), np.array([j01, j11, j11, j21, j21, j02]) ** 2)
        assert_allclose(disk_spectrum(2, radius=2.0), np.array([j01, j11]) ** 2 / 4)


class TestDisjointUnion:
    def test_two_disks(self):
        d = disk_spectrum(4)
        r = disjoint_union_ratios(d, d)
        assert r.x == pytest.approx(1.0)
        assert r.y == pytest.approx(k2())

    def test_tiny_component_invisible(self):
        square = rectangle_spectrum(1.0, 4)
        r = disjoint_union_ratios(square, 100 * square)
        assert (r.x, r.y) == pytest.approx((2.5, 2.5))

    def test_symmetric(self):
        a, b = rectangle_spectrum(2.0, 4), disk_spectrum(4, radius=0.8)
        assert disjoint_union_ratios(a, b) == disjoint_union_ratios(b, a)

    @pytest.mark.parametrize('t', np.linspace(1.0, 1.6, 13))
    def test_disk_pairs_below_k2(self, t):
        d = disk_spectrum(4)
        r = disjoint_union_ratios(d, d / (t * t))
        assert r.y <= k2() * max(1.0, r.x) + 1e-12
        assert r.y >= r.x

    def test_too_few(self):
        with pytest.raises(InvalidArgumentError):
            disjoint_union_ratios([1.0], [2.0])

    def test_merge(self):
        assert_allclose(merge_spectra([1.0, 4.0], [2.0], [3.0]), [1.0, 2.0, 3.0, 4.0])
