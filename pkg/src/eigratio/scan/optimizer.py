import logging
import math

import numpy as np
from scipy import optimize

from ..errors import InvalidArgumentError
from .campaign import solve_item
from .plan import class_info
from .records import SkipEvent
from .samplers import WorkItem

logger = logging.getLogger(__name__)


def simplex_converged(sim, fsim, xatol, fatol):
    """True once the simplex spans less than xatol in every parameter or fatol in the objective."""
    sim, fsim = np.asarray(sim), np.asarray(fsim)
    with np.errstate(invalid='ignore'):
        return bool(np.max(np.abs(sim[1:] - sim[0])) <= xatol or np.max(np.abs(fsim[1:] - fsim[0])) <= fatol)


class RatioOptimizer(object):
    """
    Derivative-free local maximization of y = lam3 / lam1 over the continuous parameters
    of one domain class. Parameters are in API units (radians for angles); the search is
    kept inside the class box from classes.yaml.
    """

    def __init__(self, class_tag, level=2, xatol=1e-4, fatol=1e-5, maxiter=400, confirm=True):
        if level < 0:
            raise InvalidArgumentError(f'Invalid refinement level: {level}')
        if not xatol > 0:
            raise InvalidArgumentError(f'Invalid parameter tolerance: {xatol}')
        if not fatol > 0:
            raise InvalidArgumentError(f'Invalid objective tolerance: {fatol}')
        if maxiter < 1:
            raise InvalidArgumentError(f'Invalid iteration limit: {maxiter}')
        info = class_info(class_tag)
        names = info.get('params')
        if not names:
            raise InvalidArgumentError(f'class {class_tag} has no continuous parameterisation')
        self.class_tag = class_tag
        self.names = list(names)
        degrees = set(info.get('degrees', ()))
        box = info.get('box', {})
        self.bounds = [tuple(math.radians(v) if n in degrees else float(v) for v in box[n]) if n in box
                       else (None, None) for n in self.names]
        self.defaults = dict(level=level, xatol=xatol, fatol=fatol, maxiter=maxiter, confirm=confirm)
        self.history = []

    def __repr__(self):
        opts = ', '.join(f'{k}={v}' for k, v in self.defaults.items())
        return f'{self.__class__.__name__}({self.class_tag!r}, {opts})'

    def _item(self, theta, k=0):
        return WorkItem(k, self.class_tag, tuple((n, float(v)) for n, v in zip(self.names, theta)))

    def solve(self, theta, level=None):
        """ScanRecord or SkipEvent for the parameter vector theta."""
        level = self.defaults['level'] if level is None else level
        return solve_item(self._item(theta, len(self.history)), level)

    def objective(self, theta):
        result = self.solve(theta)
        y = -math.inf if isinstance(result, SkipEvent) else result.y
        self.history.append((tuple(float(v) for v in theta), y))
        logger.debug('%s %s -> y = %.6f', self.class_tag, np.array2string(np.asarray(theta), precision=6), y)
        return y

    def run(self, init):
        """
        Maximize y from `init` (mapping or sequence in parameter order). The best point is
        re-solved one refinement level finer when `confirm` is set.
        """
        if isinstance(init, dict):
            missing = [n for n in self.names if n not in init]
            if missing:
                raise InvalidArgumentError(f'initial point lacks parameter(s): {", ".join(missing)}')
            x0 = np.array([float(init[n]) for n in self.names])
        else:
            x0 = np.asarray(init, dtype=float)
            if x0.shape != (len(self.names),):
                raise InvalidArgumentError(f'Invalid initial point: expected {len(self.names)} values')
        lo = np.array([-np.inf if b[0] is None else b[0] for b in self.bounds])
        hi = np.array([np.inf if b[1] is None else b[1] for b in self.bounds])
        x0 = np.clip(x0, lo, hi)

        self.history = []
        start = self.solve(x0)
        if isinstance(start, SkipEvent):
            raise InvalidArgumentError(f'initial point cannot be solved ({start.stage}): {start.message}')
        self.history.append((tuple(x0), start.y))

        cache = {x0.tobytes(): -start.y}

        def negated(theta):
            key = np.asarray(theta, dtype=float).tobytes()
            if key not in cache:
                y = self.objective(theta)
                cache[key] = math.inf if y == -math.inf else -y
            return cache[key]

        # scipy stops only when both tolerances hold; replaying the cached trajectory one
        # iteration further at a time stops on whichever holds first
        xatol, fatol = self.defaults['xatol'], self.defaults['fatol']
        for nit in range(1, self.defaults['maxiter'] + 1):
            res = optimize.minimize(negated, x0, method='Nelder-Mead', bounds=self.bounds,
                                    options=dict(xatol=0.0, fatol=0.0, maxiter=nit))
            if simplex_converged(*res.final_simplex, xatol, fatol) or res.nit < nit:
                break
        best_theta, best_y = max(self.history, key=lambda h: h[1])
        logger.info('%s: %d iterations, %d evaluations, best y = %.6f', self.class_tag, res.nit,
                    len(self.history), best_y)

        level = self.defaults['level'] + (1 if self.defaults['confirm'] else 0)
        final = self.solve(best_theta, level)
        if isinstance(final, SkipEvent):
            logger.warning('confirmation solve failed (%s), keeping level %d', final.message, self.defaults['level'])
            final = self.solve(best_theta)
        return final


def optimize_ratio(class_tag, init, level=2, **kwargs):
    """Locally maximize lam3 / lam1 over the parameters of `class_tag` starting at `init`."""
    return RatioOptimizer(class_tag, level=level, **kwargs).run(init)
