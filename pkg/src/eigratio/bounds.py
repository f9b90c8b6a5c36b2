"""
Universal (PPW, HCY) and isoperimetric upper bounds for lambda3/lambda1 as a
function of x = lambda2/lambda1, and their lower envelope.
"""
import dataclasses
import functools
import logging
import math
import warnings

import numpy as np
from scipy import integrate, optimize, special
from scipy.interpolate import CubicSpline

from .analytic import bessel_zero, k2
from .errors import DomainError, InvalidArgumentError

logger = logging.getLogger(__name__)

BOUND_TAGS = ('AB1', 'AB2', 'AB3', 'AB4', 'AB5')

_BETA_MIN = 0.5 + 1e-6
_BETA_MAX = 10.0


def _check_lams(lams, n):
    lams = np.asarray(lams, dtype=float)
    if lams.ndim != 1 or len(lams) == 0:
        raise InvalidArgumentError('need at least one eigenvalue')
    if np.any(lams <= 0) or np.any(np.diff(lams) < 0):
        raise InvalidArgumentError('eigenvalues must be positive and ascending')
    if n < 2:
        raise InvalidArgumentError(f'Invalid dimension: {n}')
    return lams


def ppw_next(lams, n=2):
    lams = _check_lams(lams, n)
    m = len(lams)
    return float(lams[-1] + 4.0 / (m * n) * lams.sum())


def hcy_next(lams, n=2):
    """Largest root of sum_j (L - lam_j)(L - (1 + 4/n) lam_j) = 0."""
    lams = _check_lams(lams, n)
    c = 1.0 + 4.0 / n
    qa = len(lams)
    qb = (1.0 + c) * lams.sum()
    qc = c * (lams ** 2).sum()
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0:
        # only reachable through rounding
        return float(qb / (2.0 * qa))
    return float((qb + math.sqrt(disc)) / (2.0 * qa))


def ab1(x):
    return k2() * x


def ab2(x):
    r = 2.0 * x - (1.0 + x * x) / 2.0
    if r < 0:
        raise DomainError(f'AB2 undefined at x = {x}')
    return 1.0 + x + math.sqrt(r)


def f_cubic(x):
    """Coefficients (highest degree first) of the cubic whose middle root is F(x)."""
    return np.array([2.0 * x,
                     -2.0 * (5.0 * x * x + 3.0 * x + 1.0),
                     6.0 * x ** 3 + 39.0 * x * x + 2.0 * x - 1.0,
                     -(24.0 * x ** 3 + 11.0 * x * x - 4.0 * x - 1.0)])


def ab_F(x):
    """Middle root of the cubic: trigonometric solution, bracketed fallback when the discriminant is borderline."""
    coeffs = f_cubic(x)
    if coeffs[0] == 0:
        raise DomainError(f'F undefined at x = {x}')
    b, c, d = coeffs[1:] / coeffs[0]
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    disc = -(4.0 * p ** 3 + 27.0 * q * q)
    scale = max(1.0, abs(p) ** 3, q * q)
    if disc > 1e-12 * scale:
        r = 2.0 * math.sqrt(-p / 3.0)
        phi = math.acos(max(-1.0, min(1.0, 3.0 * q / (2.0 * p) * math.sqrt(-3.0 / p))))
        roots = np.sort([r * math.cos(phi / 3.0 - 2.0 * math.pi * k / 3.0) - b / 3.0 for k in range(3)])
        y = roots[1]
        # one Newton polish
        poly, dpoly = np.polyval(coeffs, y), np.polyval(np.polyder(coeffs), y)
        if dpoly != 0:
            y -= poly / dpoly
        return float(y)
    if disc < -1e-12 * scale:
        raise DomainError(f'cubic has a single real root at x = {x}')
    warnings.warn(f'borderline cubic discriminant at x = {x}, using a bracketed solver')
    roots = np.sort(np.roots(coeffs).real)
    lo, hi = 0.5 * (roots[0] + roots[1]), 0.5 * (roots[1] + roots[2])
    fn = functools.partial(np.polyval, coeffs)
    if fn(lo) * fn(hi) < 0:
        return float(optimize.brentq(fn, lo, hi, xtol=1e-14))
    return float(roots[1])


def _h_objective(x, eta, xi):
    beta = eta + np.sqrt(eta * eta - eta)
    gamma = xi + np.sqrt(xi * xi - xi)
    num = 4.0 * beta * (beta + gamma) ** 2 * (x - 1.0) * (x - beta * gamma / (beta + gamma - 1.0)) ** 2
    den = (2.0 * beta - 1.0) * (2.0 * gamma - 1.0) * (x - eta) * (x - xi) * (4.0 * x - 2.0 - eta - xi)
    with np.errstate(divide='ignore', invalid='ignore'):
        val = 2.0 * eta + num / den
    return np.where((eta < x) & (xi < x) & (den > 0), val, np.inf)


def ab_H(x, grid=200):
    """H(x): 6 at x = 1, else a grid search over 1 <= eta, xi < x polished with Nelder-Mead."""
    if x < 1:
        raise DomainError(f'H undefined for x = {x} < 1')
    if x == 1:
        return 6.0
    s = np.arange(grid) / grid
    eta, xi = np.meshgrid(1.0 + (x - 1.0) * s, 1.0 + (x - 1.0) * s, indexing='ij')
    values = _h_objective(x, eta, xi)
    i, j = np.unravel_index(np.argmin(values), values.shape)
    best = float(values[i, j])
    upper = x - 1e-12 * x
    res = optimize.minimize(lambda z: float(_h_objective(x, z[0], z[1])), [eta[i, j], xi[i, j]],
                            method='Nelder-Mead', bounds=[(1.0, upper), (1.0, upper)],
                            options=dict(xatol=1e-10, fatol=1e-8, maxiter=2000))
    if res.fun < best:
        best = float(res.fun)
    return best


def ab4(x):
    return ab_H(x) - x


def _c2_ratio_integrals(beta):
    j01 = bessel_zero(0, 1)

    def power(t):
        j = special.j0(t)
        return math.exp(2.0 * beta * math.log(j)) if j > 0 else 0.0

    top, _ = integrate.quad(lambda t: t ** 3 * power(t), 0.0, j01, epsabs=1e-12, epsrel=1e-12, limit=200)
    bottom, _ = integrate.quad(lambda t: t * power(t), 0.0, j01, epsabs=1e-12, epsrel=1e-12, limit=200)
    return top, bottom


def c2(beta):
    """C_2(beta) = ((2 beta - 1) / beta) int t^3 J0^(2 beta) / int t J0^(2 beta) over [0, j_{0,1}]."""
    if not beta > 0.5:
        raise DomainError(f'C2 undefined for beta = {beta}')
    top, bottom = _c2_ratio_integrals(beta)
    return (2.0 * beta - 1.0) / beta * top / bottom


@functools.lru_cache(maxsize=None)
def _c2_spline(n=600):
    # the integral ratio is smooth down to beta = 1/2, the prefactor carries the zero
    beta = np.linspace(0.5, _BETA_MAX, n)
    ratio = np.array([np.divide(*_c2_ratio_integrals(b)) for b in beta])
    logger.debug('tabulated C2 on %d beta values', n)
    return CubicSpline(beta, ratio)


def c2_fast(beta):
    beta = np.asarray(beta, dtype=float)
    return (2.0 * beta - 1.0) / beta * _c2_spline()(beta)


def _g_objective(x, beta):
    beta = np.asarray(beta, dtype=float)
    b = beta * beta / (2.0 * beta - 1.0)
    c = c2_fast(beta)
    with np.errstate(divide='ignore', invalid='ignore'):
        val = b + (x - b) / (c * (x - b) - 1.0)
    ok = (x > b) & (c * (x - b) > 1.0)
    return np.where(ok, val, np.inf)


def ab_G(x, samples=4000):
    """
    G(x) as the infimum over admissible beta. A dense sample locates the basin; a bounded
    golden-section search (Brent) polishes it. A disagreement beyond 1e-6 is reported and the
    smaller value kept.
    """
    beta = np.linspace(_BETA_MIN, _BETA_MAX, samples)
    values = _g_objective(x, beta)
    if not np.isfinite(values).any():
        raise DomainError(f'no admissible beta for x = {x}')
    i = int(np.argmin(values))
    sampled = float(values[i])
    lo, hi = beta[max(i - 1, 0)], beta[min(i + 1, samples - 1)]
    res = optimize.minimize_scalar(lambda b: float(_g_objective(x, b)), bounds=(lo, hi), method='bounded',
                                   options=dict(xatol=1e-10))
    polished = float(res.fun) if res.success and np.isfinite(res.fun) else math.inf
    if polished > sampled + 1e-6:
        warnings.warn(f'G({x}): bounded search {polished:.8f} worse than sampling {sampled:.8f}')
    return min(polished, sampled)


def candidates(x):
    """Every AB bound defined at x, tag -> value."""
    out = {}
    for tag, fn in zip(BOUND_TAGS, (ab1, ab2, ab_F, ab4, ab_G)):
        try:
            value = fn(x)
        except DomainError:
            continue
        if np.isfinite(value):
            out[tag] = float(value)
    return out


def envelope(x):
    """Pointwise minimum of the AB bounds defined at x, and the bound attaining it."""
    if not 1.0 - 1e-12 <= x <= k2() + 1e-12:
        raise InvalidArgumentError(f'x = {x} outside [1, K2]')
    values = candidates(x)
    tag = min(values, key=values.get)
    return values[tag], tag


@dataclasses.dataclass(frozen=True, eq=False)
class BoundCurve:
    grid: np.ndarray
    envelope: np.ndarray
    active: tuple
    columns: dict  # tag -> values on the grid, nan where undefined

    def argmax(self):
        i = int(np.argmax(self.envelope))
        return float(self.grid[i]), float(self.envelope[i])


def envelope_curve(step=0.001):
    if not step > 0:
        raise InvalidArgumentError(f'Invalid step: {step}')
    top = k2()
    grid = np.append(np.arange(1.0, top, step), top)
    columns = {tag: np.full(len(grid), np.nan) for tag in BOUND_TAGS}
    env, active = np.empty(len(grid)), []
    for n, x in enumerate(grid):
        values = candidates(x)
        for tag, value in values.items():
            columns[tag][n] = value
        tag = min(values, key=values.get)
        env[n] = values[tag]
        active.append(tag)
    logger.info('envelope on %d points, max %.5f', len(grid), env.max())
    return BoundCurve(grid, env, tuple(active), columns)


def crossovers(curve):
    """(x, previous tag, next tag) wherever the active bound changes along the grid."""
    out = []
    for n in range(1, len(curve.grid)):
        if curve.active[n] != curve.active[n - 1]:
            out.append((float(0.5 * (curve.grid[n] + curve.grid[n - 1])), curve.active[n - 1], curve.active[n]))
    return out
