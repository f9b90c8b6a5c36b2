"""
Seeded domain generators. Every draw comes from ``numpy.random.default_rng(seed)``
(PCG64), so identical arguments give bit-identical vertex lists on every platform.
"""
import logging
import math

import numpy as np
from shapely.geometry import Polygon

from ..errors import GenerationFailedError, GeometryError, InvalidParameterError
from ..settings import get_settings
from . import _functional as F
from .boolean import difference
from .domain import SQRT_8_3, Domain, PolyLoop

logger = logging.getLogger(__name__)

# smallest admissible angular spacing between consecutive star vertices (radians)
STAR_MIN_GAP = 1e-3


def _limits(min_angle, max_attempts):
    settings = get_settings()
    return (settings.min_angle_floor if min_angle is None else min_angle,
            settings.max_attempts if max_attempts is None else int(max_attempts))


def random_simple_polygon(n, rng_seed, min_angle=None, max_attempts=None):
    """
    Incremental pseudo-random polygon in the unit square. Vertex j is redrawn until
    its new side crosses no earlier side and the angle it closes is at least
    `min_angle`; the last vertex must also admit the closing side.
    """
    if n < 3:
        raise InvalidParameterError(f'Invalid vertex count: {n}')
    floor, max_attempts = _limits(min_angle, max_attempts)
    eps = get_settings().eps_geom
    rng = np.random.default_rng(rng_seed)
    v = np.empty((n, 2))
    v[0], v[1] = rng.random(2), rng.random(2)
    while np.hypot(*(v[1] - v[0])) == 0.0:
        v[1] = rng.random(2)

    for j in range(2, n):
        last = j == n - 1
        for _ in range(max_attempts):
            p = rng.random(2)
            if F.vertex_angle(v[j - 2], v[j - 1], p) < floor:
                continue
            if j >= 3:
                a, b = v[:j - 2], v[1:j - 1]  # sides 0..j-3, all but the neighbour of the new side
                if F.segments_intersect(a, b, v[j - 1], p, eps=eps).any():
                    continue
            if last:
                if F.vertex_angle(v[j - 1], p, v[0]) < floor or F.vertex_angle(p, v[0], v[1]) < floor:
                    continue
                if j >= 3:
                    a, b = v[1:j - 1], v[2:j]  # sides 1..j-2
                    if F.segments_intersect(a, b, p, v[0], eps=eps).any():
                        continue
            v[j] = p
            break
        else:
            raise GenerationFailedError(f'vertex {j} rejected {max_attempts} times', stage=j, attempts=max_attempts)

    try:
        return Domain(PolyLoop(v), (), 'polygon', (('n', n), ('seed', rng_seed)), get_settings().arc_segments)
    except GeometryError as e:
        raise GenerationFailedError(f'final audit failed: {e}', stage=n, attempts=max_attempts) from e


def _star_vertices(rng, n, r1, r2, floor, center=(0.0, 0.0)):
    theta = np.sort(rng.uniform(0.0, 2.0 * math.pi, n))
    r = rng.uniform(r1, r2, n)
    gaps = np.diff(np.append(theta, theta[0] + 2.0 * math.pi))
    if gaps.min() < STAR_MIN_GAP or gaps.max() >= math.pi:
        return None
    v = np.column_stack([center[0] + r * np.cos(theta), center[1] + r * np.sin(theta)])
    ang = F.interior_angles(v)
    if ang.min() < floor or ang.max() > 2.0 * math.pi - floor:
        return None
    return v


def _draw_star(rng, n, r1, r2, floor, max_attempts, center=(0.0, 0.0)):
    for _ in range(max_attempts):
        v = _star_vertices(rng, n, r1, r2, floor, center)
        if v is not None:
            return v
    raise GenerationFailedError(f'no admissible star after {max_attempts} draws', stage=0, attempts=max_attempts)


def random_star_polygon(n, r1, r2, rng_seed, min_angle=None, max_attempts=None):
    """Vertices r e^{i theta}, theta uniform and sorted, r uniform in [r1, r2]."""
    if n < 3:
        raise InvalidParameterError(f'Invalid vertex count: {n}')
    if not 0 < r1 <= r2:
        raise InvalidParameterError(f'Invalid radii: ({r1}, {r2})')
    floor, max_attempts = _limits(min_angle, max_attempts)
    rng = np.random.default_rng(rng_seed)
    v = _draw_star(rng, n, r1, r2, floor, max_attempts)
    params = (('n', n), ('r1', r1), ('r2', r2), ('seed', rng_seed))
    return Domain(PolyLoop(v), (), 'star', params, get_settings().arc_segments)


def perturbed_rectangle(a, rng_seed, n_extra=None, max_attempts=None):
    """
    [0,1] x [0,a] with n_extra (1..8, drawn when None) extra points on its sides;
    all 4 + n_extra points are then moved by at most 0.1a.
    """
    if not a >= 1:
        raise InvalidParameterError(f'Invalid side ratio: {a}')
    _, max_attempts = _limits(None, max_attempts)
    rng = np.random.default_rng(rng_seed)
    if n_extra is None:
        n_extra = int(rng.integers(1, 9))
    if not 1 <= n_extra <= 8:
        raise InvalidParameterError(f'Invalid extra point count: {n_extra}')

    perimeter = 2.0 + 2.0 * a
    corners = np.array([0.0, 1.0, 1.0 + a, 2.0 + a])
    s = np.sort(np.concatenate([corners, rng.uniform(0.0, perimeter, n_extra)]))

    def at(t):
        if t < 1.0:
            return t, 0.0
        if t < 1.0 + a:
            return 1.0, t - 1.0
        if t < 2.0 + a:
            return 2.0 + a - t, a
        return 0.0, perimeter - t

    base = np.array([at(t) for t in s])
    params = (('a', a), ('n_extra', n_extra), ('seed', rng_seed))
    for _ in range(max_attempts):
        rho = 0.1 * a * np.sqrt(rng.random(len(base)))
        phi = rng.uniform(0.0, 2.0 * math.pi, len(base))
        v = base + np.column_stack([rho * np.cos(phi), rho * np.sin(phi)])
        try:
            return Domain(PolyLoop(v), (), 'polygon', params, get_settings().arc_segments)
        except GeometryError:
            continue
    raise GenerationFailedError(f'no admissible jitter after {max_attempts} draws', stage=0, attempts=max_attempts)


def _rectangle_loop(a):
    return np.array([(0.0, 0.0), (1.0, 0.0), (1.0, a), (0.0, a)])


def rect_minus_star(n, rng_seed, r1=0.1, r2=0.45, a=SQRT_8_3, max_attempts=None):
    """R_a with a star-shaped hole centred at the rectangle's centre."""
    floor, max_attempts = _limits(None, max_attempts)
    rng = np.random.default_rng(rng_seed)
    rect = Polygon(_rectangle_loop(a))
    params = (('n', n), ('r1', r1), ('r2', r2), ('seed', rng_seed))
    for _ in range(max_attempts):
        star = _draw_star(rng, n, r1, r2, floor, max_attempts, center=(0.5, 0.5 * a))
        if not rect.contains(Polygon(star)):
            continue
        try:
            return [Domain(PolyLoop(_rectangle_loop(a)), (PolyLoop(star),), 'difference', params,
                           get_settings().arc_segments)]
        except GeometryError:
            continue
    raise GenerationFailedError('no star fits inside the rectangle', stage=0, attempts=max_attempts)


def star_minus_rect(n, rng_seed, r1=1.2, r2=1.8, a=SQRT_8_3, max_attempts=None):
    """A star centred at the centre of R_a with R_a removed."""
    floor, max_attempts = _limits(None, max_attempts)
    rng = np.random.default_rng(rng_seed)
    rect = _rectangle_loop(a)
    params = (('n', n), ('r1', r1), ('r2', r2), ('seed', rng_seed))
    for _ in range(max_attempts):
        star = _draw_star(rng, n, r1, r2, floor, max_attempts, center=(0.5, 0.5 * a))
        if not Polygon(star).contains(Polygon(rect)):
            continue
        try:
            return [Domain(PolyLoop(star), (PolyLoop(rect),), 'difference', params, get_settings().arc_segments)]
        except GeometryError:
            continue
    raise GenerationFailedError('no star contains the rectangle', stage=0, attempts=max_attempts)


def star_minus_star(n1, n2, rng_seed, outer_radii=(0.5, 1.0), inner_radii=(0.2, 0.6), offset=0.8,
                    max_attempts=None):
    """
    S1 \\ S2 for two random stars; the second one is centred at a random point within
    `offset` of the origin. The result may fall apart, so a list of components is returned.
    """
    floor, max_attempts = _limits(None, max_attempts)
    rng = np.random.default_rng(rng_seed)
    params = (('n1', n1), ('n2', n2), ('seed', rng_seed))
    for _ in range(max_attempts):
        s1 = _draw_star(rng, n1, *outer_radii, floor, max_attempts)
        rho, phi = offset * math.sqrt(rng.random()), rng.uniform(0.0, 2.0 * math.pi)
        s2 = _draw_star(rng, n2, *inner_radii, floor, max_attempts, center=(rho * math.cos(phi), rho * math.sin(phi)))
        try:
            parts = difference(s1, s2, 'difference', params)
        except GeometryError:
            continue
        if len(parts) > 1:
            logger.debug('star difference split into %d components', len(parts))
        return parts
    raise GenerationFailedError('no admissible star difference', stage=0, attempts=max_attempts)


__all__ = ['random_simple_polygon', 'random_star_polygon', 'perturbed_rectangle',
           'rect_minus_star', 'star_minus_rect', 'star_minus_star']
