import math

import numpy as np
import pytest

from eigratio.analytic import rectangle_spectrum
from eigratio.errors import InvalidArgumentError
from eigratio.scan import RatioOptimizer, ScanRecord, optimize_ratio
from eigratio.scan import optimizer as optimizer_module
from eigratio.scan.optimizer import simplex_converged


def analytic_rectangle(item, level):
    a = item.param_dict['a']
    return ScanRecord(item.id, 'rectangle', item.params, None, tuple(rectangle_spectrum(a, 4)), level, 0.0)


def flat(item, level):
    return ScanRecord(item.id, item.class_tag, item.params, None, (1.0, 2.0, 3.0, 4.0), level, 0.0)


class TestRatioOptimizer:
    @pytest.mark.parametrize('kwargs', [
        dict(level=-1), dict(xatol=0.0), dict(fatol=-1.0), dict(maxiter=0),
    ])
    def test_invalid_options(self, kwargs):
        with pytest.raises(InvalidArgumentError):
            RatioOptimizer('rectangle', **kwargs)

    @pytest.mark.parametrize('class_tag', ['polygon', 'star', 'nowhere'])
    def test_no_parameterisation(self, class_tag):
        with pytest.raises(InvalidArgumentError):
            RatioOptimizer(class_tag)

    def test_bounds_in_radians(self):
        opt = RatioOptimizer('triangle')
        assert opt.names == ['alpha', 'beta']
        lo, hi = opt.bounds[0]
        assert lo == pytest.approx(math.radians(5.0))
        assert hi == pytest.approx(math.radians(170.0))
        assert repr(opt).startswith("RatioOptimizer('triangle', level=2")

    def test_bad_init(self):
        opt = RatioOptimizer('dumbbell')
        with pytest.raises(InvalidArgumentError):
            opt.run({'l': 1.0, 'h': 1.0})
        with pytest.raises(InvalidArgumentError):
            opt.run([1.0, 1.0])

    def test_single_solve(self):
        r = RatioOptimizer('rectangle', level=1).solve([2.0])
        assert isinstance(r, ScanRecord)
        assert r.param_dict == {'a': 2.0}


class TestStopping:
    def test_simplex_converged_either_tolerance(self):
        sim = np.array([[1.0, 1.0], [1.5, 1.0], [1.0, 1.5]])
        assert simplex_converged(sim, [0.0, 1e-6, -1e-6], 1e-4, 1e-5)
        assert simplex_converged(sim * 1e-5, [0.0, 1.0, 2.0], 1e-4, 1e-5)
        assert not simplex_converged(sim, [0.0, 1.0, 2.0], 1e-4, 1e-5)
        assert not simplex_converged(sim, [0.0, np.inf, 1.0], 1e-4, 1e-5)

    def test_flat_objective_stops_early(self, monkeypatch):
        monkeypatch.setattr(optimizer_module, 'solve_item', flat)
        opt = RatioOptimizer('rectangle', xatol=1e-4, fatol=1e-5)
        r = opt.run({'a': 2.0})
        assert r.y == 3.0
        assert len(opt.history) <= 6

    def test_analytic_rectangle_maximum(self, monkeypatch):
        monkeypatch.setattr(optimizer_module, 'solve_item', analytic_rectangle)
        opt = RatioOptimizer('rectangle', xatol=1e-6, fatol=1e-12)
        r = opt.run({'a': 1.5})
        assert r.param_dict['a'] == pytest.approx(math.sqrt(8 / 3), abs=1e-4)
        assert r.y == pytest.approx(35 / 11, abs=1e-5)
        assert r.level == 3
        thetas = [h[0] for h in opt.history[1:]]
        assert len(thetas) == len(set(thetas))

    def test_objective_tolerance_cuts_iterations(self, monkeypatch):
        monkeypatch.setattr(optimizer_module, 'solve_item', analytic_rectangle)
        loose = RatioOptimizer('rectangle', xatol=1e-8, fatol=1e-2)
        loose.run({'a': 1.5})
        tight = RatioOptimizer('rectangle', xatol=1e-8, fatol=1e-12)
        tight.run({'a': 1.5})
        assert len(loose.history) < len(tight.history)


@pytest.mark.slow
def test_rectangle_maximum():
    r = optimize_ratio('rectangle', {'a': 1.5}, level=2, xatol=1e-3, fatol=1e-5)
    assert r.param_dict['a'] == pytest.approx(math.sqrt(8 / 3), abs=0.02)
    assert r.y == pytest.approx(35 / 11, abs=0.02)
    assert r.level == 3


@pytest.mark.slow
def test_dumbbell_maximum():
    r = optimize_ratio('dumbbell', {'l': 1.0, 'h': 1.4, 'r1': 0.8, 'r2': 0.8}, level=2)
    assert r.y >= 3.19


@pytest.mark.slow
def test_ellipse_local_maximum():
    r = optimize_ratio('ellipse', {'b': 1.0}, level=2)
    assert r.y == pytest.approx(3.167, abs=0.02)
    assert r.param_dict['b'] > 1.0
