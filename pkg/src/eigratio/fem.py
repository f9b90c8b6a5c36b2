import dataclasses
import logging

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import InvalidArgumentError, MeshTooCoarseError

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class Pencil:
    """Stiffness/mass pair restricted to interior points (Dirichlet rows and columns removed)."""
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    interior: np.ndarray  # mesh point id of every matrix row
    interior_index: np.ndarray  # matrix row of every mesh point, -1 on the boundary

    @property
    def n(self):
        return self.stiffness.shape[0]

    def extend(self, u):
        """Scatter interior coefficients (n,) or (n, k) to full nodal vectors, zero on the boundary."""
        u = np.asarray(u)
        full = np.zeros((len(self.interior_index),) + u.shape[1:], dtype=u.dtype)
        full[self.interior] = u
        return full


def _element_matrices(points, triangles):
    p = points[triangles]
    # edge opposite each local vertex
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    area = 0.5 * (e[:, 2, 0] * (-e[:, 1, 1]) - e[:, 2, 1] * (-e[:, 1, 0]))
    if np.any(area <= 0):
        raise InvalidArgumentError(f'{int((area <= 0).sum())} triangles are degenerate or clockwise')
    # cotangent formula: K_ij = e_i . e_j / (4 A)
    ke = np.einsum('tik,tjk->tij', e, e) / (4.0 * area)[:, None, None]
    me = (np.ones((3, 3)) + np.eye(3))[None] * (area / 12.0)[:, None, None]
    return ke, me


def full_stiffness_mass(m):
    """P1 stiffness and consistent mass over all mesh points, before any boundary condition."""
    ke, me = _element_matrices(m.points, m.triangles)
    rows = np.repeat(m.triangles, 3, axis=1).ravel()
    cols = np.tile(m.triangles, (1, 3)).ravel()
    shape = (m.n_points, m.n_points)
    k = sp.coo_matrix((ke.ravel(), (rows, cols)), shape=shape).tocsr()
    mm = sp.coo_matrix((me.ravel(), (rows, cols)), shape=shape).tocsr()
    k.sum_duplicates()
    mm.sum_duplicates()
    return k, mm


def assemble(m):
    interior = np.flatnonzero(~m.boundary_mask)
    if len(interior) == 0:
        raise MeshTooCoarseError(f'mesh with {m.n_points} points has no interior point')
    k, mm = full_stiffness_mass(m)
    index = np.full(m.n_points, -1, dtype=np.int64)
    index[interior] = np.arange(len(interior))
    interior.setflags(write=False)
    index.setflags(write=False)
    pencil = Pencil(k[interior][:, interior].tocsr(), mm[interior][:, interior].tocsr(), interior, index)
    logger.debug('assembled pencil of size %d (nnz K=%d)', pencil.n, pencil.stiffness.nnz)
    return pencil


def interpolate(m, fn):
    """Nodal interpolant of fn(x, y) on the mesh."""
    return np.asarray(fn(m.points[:, 0], m.points[:, 1]), dtype=float)


def _full_vector(m, u):
    u = np.asarray(u, dtype=float)
    if len(u) == m.n_points:
        return u
    interior = np.flatnonzero(~m.boundary_mask)
    if len(u) != len(interior):
        raise InvalidArgumentError(f'vector of length {len(u)} matches neither the {m.n_points} mesh points '
                                   f'nor the {len(interior)} interior points')
    full = np.zeros((m.n_points,) + u.shape[1:])
    full[interior] = u
    return full


@dataclasses.dataclass(frozen=True)
class BoundaryTrace:
    """Per boundary edge: endpoints, midpoint, length, outward normal and the normal derivative(s)."""
    edges: np.ndarray
    midpoints: np.ndarray
    lengths: np.ndarray
    normals: np.ndarray
    dudn: np.ndarray  # (n_edges,) or (n_edges, k)


def boundary_trace(m, u):
    """
    Piecewise-constant normal derivative of the P1 function(s) u on every boundary edge,
    taken from the gradient of the single triangle adjacent to the edge.
    """
    full = _full_vector(m, u)
    edges, owner = m.boundary_edges()
    p = m.points
    d = p[edges[:, 1]] - p[edges[:, 0]]
    lengths = np.hypot(d[:, 0], d[:, 1])
    normals = np.column_stack([d[:, 1], -d[:, 0]]) / lengths[:, None]

    tri = m.triangles[owner]
    q = p[tri]
    e = np.stack([q[:, 2] - q[:, 1], q[:, 0] - q[:, 2], q[:, 1] - q[:, 0]], axis=1)
    area2 = e[:, 2, 0] * (-e[:, 1, 1]) - e[:, 2, 1] * (-e[:, 1, 0])
    grad_phi = np.stack([-e[..., 1], e[..., 0]], axis=-1) / area2[:, None, None]  # (E, 3, 2)
    dphi_dn = np.einsum('eik,ek->ei', grad_phi, normals)
    dudn = np.einsum('ei,ei...->e...', dphi_dn, full[tri])
    return BoundaryTrace(edges, 0.5 * (p[edges[:, 0]] + p[edges[:, 1]]), lengths, normals, dudn)


def boundary_normal_derivative(m, u, edge):
    i, j = int(edge[0]), int(edge[1])
    trace = boundary_trace(m, u)
    hit = np.flatnonzero(((trace.edges[:, 0] == i) & (trace.edges[:, 1] == j)) |
                         ((trace.edges[:, 0] == j) & (trace.edges[:, 1] == i)))
    if len(hit) == 0:
        raise InvalidArgumentError(f'edge ({i}, {j}) is not a boundary edge')
    return float(trace.dudn[hit[0]]) if trace.dudn.ndim == 1 else trace.dudn[hit[0]]


def export_pencil(pencil, prefix):
    """Matrix Market files <prefix>_K.mtx and <prefix>_M.mtx (lower triangle, symmetric)."""
    for name, mat in (('K', pencil.stiffness), ('M', pencil.mass)):
        scipy.io.mmwrite(f'{prefix}_{name}.mtx', sp.coo_matrix(mat), symmetry='symmetric',
                         comment=f'eigratio P1 {"stiffness" if name == "K" else "mass"} matrix')
