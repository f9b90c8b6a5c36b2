"""Polygon boolean operations on discretised loops, backed by shapely."""
import logging

import numpy as np
import shapely
from shapely.geometry import Polygon, MultiPolygon, GeometryCollection

from ..errors import GeometryError, InvalidParameterError
from ..settings import get_settings
from . import _functional as F
from .domain import Domain, PolyLoop

logger = logging.getLogger(__name__)

# vertices closer than this (relative to the domain size) to the line through
# their neighbours are dropped from boolean results
SNAP_REL = 1e-9


def _polygon(loop):
    return Polygon(np.asarray(loop, dtype=float)).buffer(0.0)


def _explode(geom):
    if geom.is_empty:
        return []
    if isinstance(geom, Polygon):
        return [geom]
    if isinstance(geom, (MultiPolygon, GeometryCollection)):
        return [g for g in geom.geoms if isinstance(g, Polygon) and not g.is_empty]
    return []


def _clean_loop(coords, tol):
    v = np.asarray(coords, dtype=float)[:-1]
    return F.drop_duplicates(v, tol)


def to_domain(poly, class_tag, params=(), arc_segments=None):
    """Convert a shapely polygon into a validated Domain, snapping away slivers left by clipping."""
    if arc_segments is None:
        arc_segments = get_settings().arc_segments
    minx, miny, maxx, maxy = poly.bounds
    tol = SNAP_REL * max(maxx - minx, maxy - miny)
    poly = poly.simplify(tol, preserve_topology=True)
    if not isinstance(poly, Polygon) or poly.is_empty:
        raise GeometryError('boolean result degenerated during clean-up')
    outer = PolyLoop(_clean_loop(poly.exterior.coords, tol))
    holes = tuple(PolyLoop(_clean_loop(ring.coords, tol)) for ring in poly.interiors)
    return Domain(outer, holes, class_tag, params, arc_segments)


def union(loops, class_tag='custom', params=(), arc_segments=None):
    geom = shapely.union_all([_polygon(loop) for loop in loops])
    parts = _explode(geom)
    if len(parts) != 1:
        raise GeometryError(f'union is disconnected ({len(parts)} components)')
    logger.debug('union of %d loops -> %d vertices', len(loops), len(parts[0].exterior.coords) - 1)
    return to_domain(parts[0], class_tag, params, arc_segments)


def difference(outer, cut, class_tag='difference', params=(), arc_segments=None):
    """outer minus cut as a list of connected components (largest first)."""
    a = outer.to_shapely() if isinstance(outer, Domain) else _polygon(outer)
    b = cut.to_shapely() if isinstance(cut, Domain) else _polygon(cut)
    parts = _explode(a.difference(b))
    if not parts:
        raise GeometryError('difference is empty')
    parts.sort(key=lambda p: -p.area)
    return [to_domain(p, class_tag, params, arc_segments) for p in parts]


def bite(rect, disc, class_tag='jigsaw', params=(), arc_segments=None):
    """Remove a disc that overlaps the rectangle's boundary; a hole or an empty result is rejected."""
    r = _polygon(rect)
    c = _polygon(disc)
    if c.covers(r):
        raise GeometryError('disc covers the whole rectangle')
    if r.contains(c):
        raise GeometryError('disc lies strictly inside the rectangle, the result would have a hole')
    parts = _explode(r.difference(c))
    if len(parts) != 1:
        raise GeometryError(f'bite leaves {len(parts)} components')
    if not c.intersects(r):
        logger.debug('disc misses the rectangle, nothing removed')
    return to_domain(parts[0], class_tag, params, arc_segments)


def with_small_hole(domain, center, radius, arc_segments=None):
    """Copy of `domain` with a polygonal circular hole; the hole must lie strictly inside."""
    if not radius > 0:
        raise InvalidParameterError(f'Invalid hole radius: {radius}')
    n = domain.arc_segments if arc_segments is None else int(arc_segments)
    hole = F.circle(center, radius, n)
    if not domain.to_shapely().contains(Polygon(hole)):
        raise GeometryError('hole is not strictly inside the domain')
    params = domain.params + (('hole_x', float(center[0])), ('hole_y', float(center[1])), ('hole_r', radius))
    return Domain(domain.outer, domain.holes + (PolyLoop(hole),), domain.class_tag, params, domain.arc_segments)
