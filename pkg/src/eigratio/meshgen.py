import dataclasses
import logging
import math

import numpy as np
import triangle as tr
from shapely.geometry import Polygon

from .errors import GeometryError, InvalidArgumentError
from .settings import get_settings

logger = logging.getLogger(__name__)

# with every angle >= 20 deg a triangle of area A has longest edge below sqrt(A / 0.0909)
_AREA_PER_EDGE2 = 0.09
_MAX_REFINE_PASSES = 12


def _frozen(array, dtype):
    array = np.ascontiguousarray(array, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclasses.dataclass(frozen=True, eq=False)
class Mesh:
    points: np.ndarray
    triangles: np.ndarray
    boundary_mask: np.ndarray
    generation: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'points', _frozen(self.points, float))
        object.__setattr__(self, 'triangles', _frozen(self.triangles, np.int64))
        object.__setattr__(self, 'boundary_mask', _frozen(self.boundary_mask, bool))
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise InvalidArgumentError(f'points must have shape (n, 2), got {self.points.shape}')
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise InvalidArgumentError(f'triangles must have shape (t, 3), got {self.triangles.shape}')
        if len(self.boundary_mask) != len(self.points):
            raise InvalidArgumentError('boundary_mask length differs from the point count')

    @property
    def n_points(self):
        return len(self.points)

    @property
    def n_triangles(self):
        return len(self.triangles)

    def triangle_areas(self):
        p = self.points[self.triangles]
        e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @property
    def area(self):
        return float(self.triangle_areas().sum())

    def edges(self):
        """
        Unique edges (sorted vertex pairs, lexicographic order), the number of triangles
        using each edge, and for every triangle the ids of its edges opposite vertices 2, 0, 1.
        """
        t = self.triangles
        local = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        local.sort(axis=1)
        unique, inverse, counts = np.unique(local, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.reshape(-1)
        return unique, counts, inverse.reshape(3, -1).T

    def boundary_edges(self):
        """Boundary edges as (i, j) oriented like their triangle, plus the owning triangle index."""
        t = self.triangles
        local = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        owner = np.tile(np.arange(len(t)), 3)
        key = np.sort(local, axis=1)
        _, inverse, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
        single = counts[inverse.reshape(-1)] == 1
        return local[single], owner[single]

    def with_points(self, points):
        """Same connectivity on moved points."""
        return Mesh(points, self.triangles, self.boundary_mask, self.generation)

    def __repr__(self):
        return (f'Mesh(points={self.n_points}, triangles={self.n_triangles}, '
                f'boundary={int(self.boundary_mask.sum())}, generation={self.generation})')


@dataclasses.dataclass(frozen=True)
class MeshQuality:
    min_angle: float  # degrees
    max_angle: float  # degrees
    max_edge: float
    n_triangles: int


def _angles_and_edges(points, triangles):
    p = points[triangles]
    a = np.linalg.norm(p[:, 1] - p[:, 2], axis=1)  # opposite vertex 0
    b = np.linalg.norm(p[:, 2] - p[:, 0], axis=1)
    c = np.linalg.norm(p[:, 0] - p[:, 1], axis=1)
    alpha = np.arccos(np.clip((b * b + c * c - a * a) / (2 * b * c), -1.0, 1.0))
    beta = np.arccos(np.clip((a * a + c * c - b * b) / (2 * a * c), -1.0, 1.0))
    gamma = math.pi - alpha - beta
    return np.column_stack([alpha, beta, gamma]), np.column_stack([a, b, c])


def mesh_quality(m):
    angles, edges = _angles_and_edges(m.points, m.triangles)
    return MeshQuality(float(np.degrees(angles.min())), float(np.degrees(angles.max())),
                       float(edges.max()), m.n_triangles)


def _boundary_mask(n_points, triangles):
    local = np.sort(np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]]), axis=1)
    unique, counts = np.unique(local, axis=0, return_counts=True)
    mask = np.zeros(n_points, dtype=bool)
    mask[unique[counts == 1].ravel()] = True
    return mask


def _orient(points, triangles):
    p = points[triangles]
    e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    neg = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0] < 0
    triangles = triangles.copy()
    triangles[neg] = triangles[neg][:, [0, 2, 1]]
    return triangles


def triangulate(d, h_target):
    """
    Constrained Delaunay triangulation of `d` with Ruppert refinement: every input
    segment is kept, angles are at least min(20 deg, smallest input angle) and no edge
    is longer than h_target.
    """
    if not h_target > 0:
        raise InvalidArgumentError(f'Invalid target edge length: {h_target}')
    quality = get_settings().min_quality_angle
    vertices, segments, holes, offset = [], [], [], 0
    for k, loop in enumerate(d.loops):
        v = loop.vertices
        n = len(v)
        vertices.append(v)
        idx = np.arange(n)
        segments.append(np.column_stack([idx, (idx + 1) % n]) + offset)
        offset += n
        if k > 0:
            rp = Polygon(v).representative_point()
            holes.append((rp.x, rp.y))
    tri_in = dict(vertices=np.vstack(vertices), segments=np.vstack(segments))
    if holes:
        tri_in['holes'] = np.array(holes)

    max_area = _AREA_PER_EDGE2 * h_target * h_target
    try:
        out = tr.triangulate(tri_in, f'Qzpq{quality:g}a{max_area:.17g}')
        for _ in range(_MAX_REFINE_PASSES):
            _, edges = _angles_and_edges(out['vertices'], out['triangles'])
            long = edges.max(axis=1) > h_target
            if not long.any():
                break
            p = out['vertices'][out['triangles']]
            areas = 0.5 * np.abs((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                                 - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0]))
            limits = np.where(long, 0.25 * areas, -1.0)  # negative means unconstrained
            refine_in = dict(vertices=out['vertices'], triangles=out['triangles'],
                             segments=out['segments'], triangle_max_area=limits)
            out = tr.triangulate(refine_in, f'Qzrpq{quality:g}a')
    except (RuntimeError, ValueError) as e:
        raise GeometryError(f'triangulation failed: {e}') from e
    if 'triangles' not in out or len(out['triangles']) == 0:
        raise GeometryError('triangulation produced no triangles')

    points = np.asarray(out['vertices'], dtype=float)
    triangles = _orient(points, np.asarray(out['triangles'], dtype=np.int64))
    mesh = Mesh(points, triangles, _boundary_mask(len(points), triangles), 0)
    logger.debug('triangulate %s: h=%.4g -> %d points, %d triangles', d.class_tag, h_target,
                 mesh.n_points, mesh.n_triangles)
    rel = abs(mesh.area - d.area) / d.area
    if rel > 1e-10:
        logger.warning('mesh area differs from domain area by %.3g relative', rel)
    return mesh


def refine(m):
    """Red refinement: every triangle is split into four through its edge midpoints."""
    edges, counts, tri_edges = m.edges()
    n = m.n_points
    midpoints = 0.5 * (m.points[edges[:, 0]] + m.points[edges[:, 1]])
    points = np.vstack([m.points, midpoints])
    mask = np.concatenate([m.boundary_mask, counts == 1])

    a, b, c = m.triangles.T
    mab, mbc, mca = (tri_edges + n).T
    children = np.stack([
        np.column_stack([a, mab, mca]),
        np.column_stack([mab, b, mbc]),
        np.column_stack([mca, mbc, c]),
        np.column_stack([mab, mbc, mca]),
    ], axis=1).reshape(-1, 3)
    return Mesh(points, children, mask, m.generation + 1)


def coarse_size(d):
    return get_settings().coarse_fraction * d.diameter


def mesh_for(d, level=None, h_target=None):
    """Coarse triangulation at coarse_fraction * diameter followed by `level` red refinements."""
    level = get_settings().refine_levels if level is None else int(level)
    if level < 0:
        raise InvalidArgumentError(f'Invalid refinement level: {level}')
    m = triangulate(d, coarse_size(d) if h_target is None else h_target)
    for _ in range(level):
        m = refine(m)
    return m
