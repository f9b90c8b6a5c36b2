import dataclasses
import logging
import math
from typing import NamedTuple, Tuple

import numpy as np
import shapely

from ..errors import GeometryError, InvalidParameterError
from ..settings import get_settings
from . import _functional as F

logger = logging.getLogger(__name__)

CLASS_TAGS = ('rectangle', 'triangle', 'quadrilateral', 'ellipse', 'sector', 'polygon', 'star',
              'dumbbell', 'jigsaw', 'difference', 'custom')

SQRT_8_3 = math.sqrt(8.0 / 3.0)


class Point2(NamedTuple):
    x: float
    y: float


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclasses.dataclass(frozen=True, eq=False)
class PolyLoop:
    """Closed polygonal loop; the closing edge from the last vertex back to the first is implicit."""
    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise GeometryError(f'loop vertices must have shape (n, 2), got {v.shape}')
        if len(v) < 3:
            raise GeometryError(f'loop needs at least 3 vertices, got {len(v)}')
        if not np.all(np.isfinite(v)):
            raise GeometryError('loop has non-finite coordinates')
        if np.any(np.all(v == np.roll(v, -1, axis=0), axis=1)):
            raise GeometryError('loop has repeated consecutive vertices')
        object.__setattr__(self, 'vertices', _frozen(v))
        if F.crossing_pairs([v], eps=get_settings().eps_geom):
            raise GeometryError('loop is not simple')

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return (Point2(float(x), float(y)) for x, y in self.vertices)

    def __eq__(self, other):
        return isinstance(other, PolyLoop) and np.array_equal(self.vertices, other.vertices)

    @property
    def signed_area(self):
        return F.signed_area(self.vertices)

    @property
    def is_ccw(self):
        return self.signed_area > 0

    def oriented(self, ccw=True):
        if self.is_ccw == ccw:
            return self
        return PolyLoop(self.vertices[::-1])

    def angles(self):
        return F.interior_angles(self.vertices)


@dataclasses.dataclass(frozen=True, eq=False)
class Domain:
    outer: PolyLoop
    holes: Tuple[PolyLoop, ...] = ()
    class_tag: str = 'custom'
    params: Tuple[Tuple[str, float], ...] = ()
    arc_segments: int = 256

    def __post_init__(self):
        outer = self.outer if isinstance(self.outer, PolyLoop) else PolyLoop(self.outer)
        holes = tuple(h if isinstance(h, PolyLoop) else PolyLoop(h) for h in self.holes)
        object.__setattr__(self, 'outer', outer.oriented(ccw=True))
        object.__setattr__(self, 'holes', tuple(h.oriented(ccw=False) for h in holes))
        params = self.params.items() if isinstance(self.params, dict) else self.params
        object.__setattr__(self, 'params', tuple((str(k), float(v)) for k, v in params))
        if self.class_tag not in CLASS_TAGS:
            raise GeometryError(f'unknown class tag: {self.class_tag}')
        if self.arc_segments < 3:
            raise InvalidParameterError(f'Invalid arc_segments: {self.arc_segments}')
        self._validate()

    def _validate(self):
        settings = get_settings()
        if self.area <= 0:
            raise GeometryError(f'domain has nonpositive area {self.area}')
        loops = [self.outer.vertices] + [h.vertices for h in self.holes]
        if self.holes:
            pairs = F.crossing_pairs(loops, eps=settings.eps_geom)
            if pairs:
                raise GeometryError(f'boundary loops intersect ({len(pairs)} crossing segment pairs)')
            outer = shapely.Polygon(self.outer.vertices)
            for h in self.holes:
                if not outer.contains(shapely.Point(h.vertices[0])):
                    raise GeometryError('hole lies outside the outer loop')
            for i, hi in enumerate(self.holes):
                pi = shapely.Polygon(hi.vertices)
                for hj in self.holes[i + 1:]:
                    if pi.intersects(shapely.Polygon(hj.vertices)):
                        raise GeometryError('holes overlap')
        floor = settings.min_angle_floor
        for loop in loops:
            ang = F.interior_angles(loop)
            if ang.min() < floor - 1e-12 or ang.max() > 2 * math.pi - floor + 1e-12:
                bad = ang.min() if ang.min() < floor else 2 * math.pi - ang.max()
                raise GeometryError(f'interior angle {math.degrees(bad):.3f} deg violates the '
                                    f'{math.degrees(floor):.1f} deg floor')

    @property
    def loops(self):
        return (self.outer,) + self.holes

    @property
    def param_dict(self):
        return dict(self.params)

    @property
    def area(self):
        return self.outer.signed_area + sum(h.signed_area for h in self.holes)

    @property
    def diameter(self):
        hull = shapely.convex_hull(shapely.MultiPoint(self.outer.vertices))
        v = np.asarray(hull.exterior.coords)[:-1]
        d = v[:, None, :] - v[None, :, :]
        return float(np.sqrt((d ** 2).sum(-1)).max())

    def bounds(self):
        v = self.outer.vertices
        return v[:, 0].min(), v[:, 1].min(), v[:, 0].max(), v[:, 1].max()

    def to_shapely(self):
        return shapely.Polygon(self.outer.vertices, [h.vertices for h in self.holes])

    def contains(self, points):
        """Boolean mask of points strictly inside the polygonal domain."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        poly = self.to_shapely()
        shapely.prepare(poly)
        return shapely.contains_xy(poly, p[:, 0], p[:, 1])

    def dilate(self, t):
        if not t > 0:
            raise InvalidParameterError(f'Invalid dilation factor: {t}')
        return Domain(PolyLoop(self.outer.vertices * t), tuple(PolyLoop(h.vertices * t) for h in self.holes),
                      self.class_tag, self.params, self.arc_segments)

    def __repr__(self):
        params = ', '.join(f'{k}={v:.6g}' for k, v in self.params)
        return (f'Domain({self.class_tag}({params}), {len(self.outer)} outer vertices, '
                f'{len(self.holes)} holes, area={self.area:.6g})')


def _arc_segments(arc_segments):
    n = get_settings().arc_segments if arc_segments is None else int(arc_segments)
    if n < 3:
        raise InvalidParameterError(f'Invalid arc_segments: {n}')
    return n


def _check_angle_pair(first, second, names):
    if not (0.0 < first < math.pi and 0.0 < second < math.pi and first + second < math.pi):
        raise InvalidParameterError(f'Invalid angle pair {names}: ({first}, {second})')


def _apex(first, second, lower=False):
    """Third vertex of the triangle over the base (0,0)-(1,0) with base angles first/second."""
    side = math.sin(second) / math.sin(first + second)
    sign = -1.0 if lower else 1.0
    return side * math.cos(first), sign * side * math.sin(first)


def make_rectangle(a):
    if not a >= 1:
        raise InvalidParameterError(f'Invalid side ratio: {a}')
    v = [(0.0, 0.0), (1.0, 0.0), (1.0, a), (0.0, a)]
    return Domain(PolyLoop(v), (), 'rectangle', (('a', a),), get_settings().arc_segments)


def make_triangle(alpha, beta):
    """Triangle with base (0,0)-(1,0) and base angles alpha, beta (radians)."""
    _check_angle_pair(alpha, beta, '(alpha, beta)')
    v = [(0.0, 0.0), (1.0, 0.0), _apex(alpha, beta)]
    return Domain(PolyLoop(v), (), 'triangle', (('alpha', alpha), ('beta', beta)), get_settings().arc_segments)


def make_quadrilateral(alpha, beta, gamma, delta):
    """
    Two triangles glued along the unit diagonal (0,0)-(1,0): the upper one has base
    angles (alpha, beta), the lower one (gamma, delta).
    """
    _check_angle_pair(alpha, beta, '(alpha, beta)')
    _check_angle_pair(gamma, delta, '(gamma, delta)')
    v = [(0.0, 0.0), _apex(gamma, delta, lower=True), (1.0, 0.0), _apex(alpha, beta)]
    params = (('alpha', alpha), ('beta', beta), ('gamma', gamma), ('delta', delta))
    return Domain(PolyLoop(v), (), 'quadrilateral', params, get_settings().arc_segments)


def make_ellipse(b, arc_segments=None):
    """Ellipse with semi-axes 1 and b."""
    if not b >= 1:
        raise InvalidParameterError(f'Invalid axis ratio: {b}')
    n = _arc_segments(arc_segments)
    t = 2.0 * math.pi * np.arange(n) / n
    v = np.column_stack([np.cos(t), b * np.sin(t)])
    return Domain(PolyLoop(v), (), 'ellipse', (('b', b),), n)


def make_disk(arc_segments=None):
    """Unit disk as an arc_segments-gon."""
    return make_ellipse(1.0, arc_segments)


def make_sector(r, theta, arc_segments=None):
    """Annulus sector 1 <= rho <= r, 0 <= phi <= theta."""
    if not r > 1:
        raise InvalidParameterError(f'Invalid outer radius: {r}')
    if not 0.01 * math.pi - 1e-12 <= theta <= 1.99 * math.pi + 1e-12:
        raise InvalidParameterError(f'Invalid sector angle: {theta}')
    n = _arc_segments(arc_segments)
    chords = F.chords_for(theta, n)
    outer_arc = F.arc((0.0, 0.0), r, 0.0, theta, chords)
    inner_arc = F.arc((0.0, 0.0), 1.0, theta, 0.0, chords)
    return Domain(PolyLoop(np.vstack([outer_arc, inner_arc])), (), 'sector', (('r', r), ('theta', theta)), n)


def make_dumbbell(l, h, r1, r2, arc_segments=None):
    """([0,l] x [-h,h]) united with discs of radius r1 at (0,0) and r2 at (l,0)."""
    for name, value in (('l', l), ('h', h), ('r1', r1), ('r2', r2)):
        if not value > 0:
            raise InvalidParameterError(f'Invalid dumbbell parameter {name}: {value}')
    from .boolean import union

    n = _arc_segments(arc_segments)
    strip = np.array([(0.0, -h), (l, -h), (l, h), (0.0, h)])
    parts = [strip, F.circle((0.0, 0.0), r1, n), F.circle((l, 0.0), r2, n)]
    params = (('l', l), ('h', h), ('r1', r1), ('r2', r2))
    return union(parts, class_tag='dumbbell', params=params, arc_segments=n)


def make_jigsaw(a, cx, cy, r, arc_segments=None):
    """[0,a] x [0,1] with the disc of radius r centred at (cx, cy) removed."""
    if not a >= 1:
        raise InvalidParameterError(f'Invalid side ratio: {a}')
    if not r > 0:
        raise InvalidParameterError(f'Invalid radius: {r}')
    from .boolean import bite

    n = _arc_segments(arc_segments)
    rect = np.array([(0.0, 0.0), (a, 0.0), (a, 1.0), (0.0, 1.0)])
    params = (('a', a), ('cx', cx), ('cy', cy), ('r', r))
    return bite(rect, F.circle((cx, cy), r, n), class_tag='jigsaw', params=params, arc_segments=n)


BUILDERS = {
    'rectangle': make_rectangle,
    'triangle': make_triangle,
    'quadrilateral': make_quadrilateral,
    'ellipse': make_ellipse,
    'sector': make_sector,
    'dumbbell': make_dumbbell,
    'jigsaw': make_jigsaw,
}


def build(class_tag, params):
    """Build a continuously parameterised domain from a name -> value mapping or an ordered sequence."""
    try:
        builder = BUILDERS[class_tag]
    except KeyError:
        raise InvalidParameterError(f'class {class_tag!r} has no continuous parameterisation') from None
    try:
        if isinstance(params, dict):
            return builder(**params)
        return builder(*params)
    except TypeError as e:
        raise InvalidParameterError(f'bad parameters for {class_tag}: {e}') from None
