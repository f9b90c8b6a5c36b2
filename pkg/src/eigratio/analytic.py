"""Closed-form spectra: rectangles, discs and disjoint unions, with the Bessel machinery they need."""
import functools
import math
from typing import NamedTuple

import numpy as np
from scipy import special
from scipy.optimize import brentq

from .errors import InvalidArgumentError, NumericalError

PI2 = math.pi ** 2


class RatioPoint(NamedTuple):
    x: float  # lambda2 / lambda1
    y: float  # lambda3 / lambda1


def _check_order(p):
    if p < 0 or (2 * p) != int(2 * p):
        raise InvalidArgumentError(f'Unsupported Bessel order: {p}')


def bessel_j(p, t):
    """J_p(t) for integer or half-integer p >= 0 and t >= 0."""
    _check_order(p)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidArgumentError('Bessel argument must be nonnegative')
    out = special.jv(p, t)
    return float(out) if out.ndim == 0 else out


@functools.lru_cache(maxsize=None)
def bessel_zero(p, q):
    """q-th positive zero of J_p, bracketed on a 0.05 grid and refined with Brent's method."""
    _check_order(p)
    if q < 1:
        raise InvalidArgumentError(f'Invalid zero index: {q}')
    step = 0.05
    stop = p + (q + 2) * math.pi + 10.0
    grid = np.arange(step, stop + step, step)
    values = special.jv(p, grid)
    sign_changes = np.flatnonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)
    if len(sign_changes) < q:
        raise NumericalError(f'no bracket for zero {q} of J_{p} below {stop:.1f}')
    i = sign_changes[q - 1]
    return brentq(lambda t: special.jv(p, t), grid[i], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)


def k2():
    """Sharp upper bound for lambda2/lambda1 of planar domains, (j_{1,1} / j_{0,1})^2."""
    return (bessel_zero(1, 1) / bessel_zero(0, 1)) ** 2


def rectangle_modes(a, k):
    """
    The k lowest (lambda, m, n) of [0,1] x [0,a], lambda = pi^2 (m^2 + n^2/a^2),
    ordered by value and then by m. Every pair below the k-th value is enumerated.
    """
    if not a >= 1:
        raise InvalidArgumentError(f'Invalid side ratio: {a}')
    if k < 1:
        raise InvalidArgumentError(f'Invalid count: {k}')
    # (1, n) for n = 1..k are k candidates, so the k-th value is at most pi^2 (1 + k^2/a^2)
    cap = 1.0 + k * k / (a * a)
    m_max = int(math.floor(math.sqrt(cap))) + 1
    n_max = int(math.floor(a * math.sqrt(cap))) + 1
    m, n = np.meshgrid(np.arange(1, m_max + 1), np.arange(1, n_max + 1), indexing='ij')
    m, n = m.ravel(), n.ravel()
    lam = PI2 * (m * m + n * n / (a * a))
    order = np.lexsort((n, m, lam))[:k]
    return [(float(lam[i]), int(m[i]), int(n[i])) for i in order]


def rectangle_spectrum(a, k):
    return np.array([lam for lam, _, _ in rectangle_modes(a, k)])


def rectangle_curve(x):
    """Largest lambda3/lambda1 over rectangles with lambda2/lambda1 = x."""
    if not 1.0 - 1e-12 <= x <= 2.5 + 1e-12:
        raise InvalidArgumentError(f'x = {x} outside [1, 5/2]')
    if x <= 20.0 / 11.0:
        return 8.0 / 3.0 * x - 5.0 / 3.0
    return 5.0 - x


def circles_curve(x):
    """Largest lambda3/lambda1 over disjoint unions of discs with lambda2/lambda1 = x."""
    c = k2()
    if not 1.0 - 1e-12 <= x <= c + 1e-12:
        raise InvalidArgumentError(f'x = {x} outside [1, K2]')
    return c


def disk_spectrum(k, radius=1.0):
    """k lowest Dirichlet eigenvalues of a disc, j_{p,q}^2 / R^2, twice for p >= 1."""
    if k < 1:
        raise InvalidArgumentError(f'Invalid count: {k}')
    values = []
    for p in range(k + 1):
        for q in range(1, k + 1):
            lam = (bessel_zero(p, q) / radius) ** 2
            values.extend([lam] if p == 0 else [lam, lam])
    return np.sort(values)[:k]


def merge_spectra(*spectra):
    """Spectrum of a disjoint union: all component eigenvalues merged in ascending order."""
    return np.sort(np.concatenate([np.asarray(s, dtype=float) for s in spectra]))


def disjoint_union_ratios(spectrum_a, spectrum_b):
    merged = merge_spectra(spectrum_a, spectrum_b)
    if len(merged) < 3:
        raise InvalidArgumentError(f'need three eigenvalues, the union has {len(merged)}')
    return RatioPoint(float(merged[1] / merged[0]), float(merged[2] / merged[0]))
