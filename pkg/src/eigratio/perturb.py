"""
First-order eigenvalue corrections under a boundary displacement eps * f along the outward
normal. For a simple eigenvalue the correction is -F_jj, for a cluster of equal eigenvalues
the corrections are the eigenvalues of -F restricted to the cluster, where

    F_pq = integral over the boundary of f (du_p/dn) (du_q/dn).

F is available in closed form on the rectangle [0,1] x [0,a] (RectangleField) and by edge
midpoint quadrature on any mesh (MeshField, RectangleField or a callable).
"""
import dataclasses
import logging
import math
from typing import Tuple

import numpy as np

from .analytic import rectangle_curve, rectangle_modes
from .eig import smallest_eigenpairs
from .errors import DegenerateEigenvalueError, InvalidArgumentError, NumericalError
from .fem import assemble, boundary_trace
from .geometry import SQRT_8_3, make_rectangle
from .meshgen import Mesh, mesh_for
from .settings import get_settings

logger = logging.getLogger(__name__)

PI2 = math.pi ** 2
SQRT2 = math.sqrt(2.0)
# slope of lam3/lam1 along the cosine family on R_sqrt(8/3), per unit (c2 - sqrt(2) c0)
COSINE_SLOPE = 96.0 * math.sqrt(3.0) / 121.0


def _moment(alpha, beta, cos, d):
    """Integral over [0,1] of (alpha + beta s + g(s)) cos(d pi s), g the cosine profile."""
    if d == 0:
        return alpha + 0.5 * beta + (cos[0] if len(cos) else 0.0)
    val = beta * ((-1.0) ** d - 1.0) / (d * math.pi) ** 2
    if d < len(cos):
        val += cos[d] / SQRT2
    return val


def _sin_product(profile, j, k):
    # integral of profile(s) sin(j pi s) sin(k pi s) over [0,1]
    return 0.5 * (_moment(*profile, abs(j - k)) - _moment(*profile, j + k))


@dataclasses.dataclass(frozen=True)
class RectangleField:
    """
    Displacement field on the boundary of [0,1] x [0,a]: the linear function
    p + q x1 + r x2 on every edge plus, on the top edge only, the cosine profile
    g(x1) = c0 + sum_{l>=1} sqrt(2) c_l cos(l pi x1).
    """
    a: float
    cos: Tuple[float, ...] = ()
    linear: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, 'cos', tuple(float(c) for c in self.cos))
        object.__setattr__(self, 'linear', tuple(float(c) for c in self.linear))
        if not self.a >= 1:
            raise InvalidArgumentError(f'Invalid side ratio: {self.a}')
        if len(self.cos) > 5:
            raise InvalidArgumentError(f'cosine profile takes at most 5 coefficients, got {len(self.cos)}')
        if len(self.linear) != 3:
            raise InvalidArgumentError(f'linear part needs (p, q, r), got {self.linear}')
        if not all(math.isfinite(c) for c in self.cos + self.linear):
            raise InvalidArgumentError('field coefficients must be finite')

    def profile(self, edge):
        """(alpha, beta, cos) with f = alpha + beta s + g(s) along `edge`, s in [0,1]."""
        p, q, r = self.linear
        a = self.a
        if edge == 'bottom':
            return p, q, ()
        if edge == 'top':
            return p + r * a, q, self.cos
        if edge == 'left':
            return p, r * a, ()
        if edge == 'right':
            return p + q, r * a, ()
        raise InvalidArgumentError(f'unknown edge: {edge!r}')

    def g(self, x1):
        x1 = np.asarray(x1, dtype=float)
        out = np.zeros_like(x1)
        for l, c in enumerate(self.cos):
            out += c if l == 0 else SQRT2 * c * np.cos(l * math.pi * x1)
        return out

    def edge_values(self, edge, s):
        alpha, beta, cos = self.profile(edge)
        s = np.asarray(s, dtype=float)
        val = alpha + beta * s
        return val + self.g(s) if cos else val

    def on_edges(self, midpoints, normals):
        """f at boundary edge midpoints, the edge told apart by its outward normal."""
        out = np.empty(len(midpoints))
        x1, x2 = midpoints[:, 0], midpoints[:, 1]
        masks = {'top': normals[:, 1] > 0.5, 'bottom': normals[:, 1] < -0.5,
                 'right': normals[:, 0] > 0.5, 'left': normals[:, 0] < -0.5}
        for edge, mask in masks.items():
            s = x1[mask] if edge in ('top', 'bottom') else x2[mask] / self.a
            out[mask] = self.edge_values(edge, s)
        return out

    def displacement(self, points):
        """
        A smooth vector field V on the rectangle with V . n = f on every edge, blended
        linearly between opposite edges.
        """
        x1, s = points[:, 0], points[:, 1] / self.a
        v1 = -(1.0 - x1) * self.edge_values('left', s) + x1 * self.edge_values('right', s)
        v2 = -(1.0 - s) * self.edge_values('bottom', x1) + s * self.edge_values('top', x1)
        return np.column_stack([v1, v2])

    def __add__(self, other):
        if not isinstance(other, RectangleField) or other.a != self.a:
            return NotImplemented
        n = max(len(self.cos), len(other.cos))
        cos = tuple(np.pad(self.cos, (0, n - len(self.cos))) + np.pad(other.cos, (0, n - len(other.cos))))
        return RectangleField(self.a, cos, tuple(np.add(self.linear, other.linear)))

    def __mul__(self, t):
        return RectangleField(self.a, tuple(t * c for c in self.cos), tuple(t * c for c in self.linear))

    __rmul__ = __mul__


@dataclasses.dataclass(frozen=True, eq=False)
class MeshField:
    """Piecewise-linear field given by its values at the mesh points (only boundary points are read)."""
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or not np.all(np.isfinite(values)):
            raise InvalidArgumentError('mesh field values must be a finite vector')
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_function(cls, m, fn):
        return cls(np.asarray(fn(m.points[:, 0], m.points[:, 1]), dtype=float))


def _edge_field(m, trace, field):
    if isinstance(field, MeshField):
        if len(field.values) != m.n_points:
            raise InvalidArgumentError(f'field has {len(field.values)} values, mesh has {m.n_points} points')
        return 0.5 * (field.values[trace.edges[:, 0]] + field.values[trace.edges[:, 1]])
    if isinstance(field, RectangleField):
        return field.on_edges(trace.midpoints, trace.normals)
    if callable(field):
        return np.asarray(field(trace.midpoints[:, 0], trace.midpoints[:, 1]), dtype=float)
    raise InvalidArgumentError(f'unsupported field type: {type(field).__name__}')


def rectangle_f_pq(a, mode_p, mode_q, field):
    """Closed-form F_pq for the L2-normalised modes (m, n) of [0,1] x [0,a]."""
    if not isinstance(field, RectangleField):
        raise InvalidArgumentError('closed-form integrals need a RectangleField')
    if field.a != a:
        raise InvalidArgumentError(f'field is defined on a = {field.a}, not {a}')
    (mp, np_), (mq, nq) = mode_p, mode_q
    horizontal = 4.0 / a * (np_ * nq * PI2 / (a * a))
    vertical = 4.0 * mp * mq * PI2
    bottom = horizontal * _sin_product(field.profile('bottom'), mp, mq)
    top = (-1.0) ** (np_ + nq) * horizontal * _sin_product(field.profile('top'), mp, mq)
    left = vertical * _sin_product(field.profile('left'), np_, nq)
    right = (-1.0) ** (mp + mq) * vertical * _sin_product(field.profile('right'), np_, nq)
    return bottom + top + left + right


def f_pq(support, u_p, u_q, field):
    """
    Boundary integral of f (du_p/dn)(du_q/dn). `support` is either a Mesh (u_p, u_q nodal or
    interior vectors, M-normalised) or a rectangle side ratio a (u_p, u_q mode pairs (m, n)).
    """
    if isinstance(support, Mesh):
        trace = boundary_trace(support, np.column_stack([u_p, u_q]))
        f = _edge_field(support, trace, field)
        return float(np.sum(trace.lengths * f * trace.dudn[:, 0] * trace.dudn[:, 1]))
    return rectangle_f_pq(float(support), u_p, u_q, field)


def mesh_f_matrix(m, vectors, field):
    """F_pq for every pair of columns of `vectors`."""
    trace = boundary_trace(m, vectors)
    f = _edge_field(m, trace, field)
    d = trace.dudn
    fm = d.T @ (d * (trace.lengths * f)[:, None])
    return 0.5 * (fm + fm.T)


def _gap_tol(lam, gap_tol_rel):
    return (get_settings().gap_tol_rel if gap_tol_rel is None else gap_tol_rel) * abs(lam)


def first_order_simple(values, j, fjj, gap_tol_rel=None):
    """Correction -F_jj of the simple eigenvalue values[j] (0-based)."""
    values = np.asarray(values, dtype=float)
    tol = _gap_tol(values[j], gap_tol_rel)
    for i in (j - 1, j + 1):
        if 0 <= i < len(values) and abs(values[i] - values[j]) <= tol:
            raise DegenerateEigenvalueError(f'eigenvalue {j + 1} = {values[j]:.10g} is not simple '
                                            f'(eigenvalue {i + 1} = {values[i]:.10g})')
    return -float(fjj)


def first_order_double(fkk, fll, fkl):
    """The two roots mu1 <= mu2 of (F_kk + mu)(F_ll + mu) - F_kl^2 = 0."""
    b = fkk + fll
    disc = b * b - 4.0 * (fkk * fll - fkl * fkl)
    if disc < -1e-12 * max(b * b, fkl * fkl, 1e-300):
        raise NumericalError(f'negative discriminant {disc:g} for F = [[{fkk}, {fkl}], [{fkl}, {fll}]]')
    half = math.hypot(0.5 * (fkk - fll), fkl)
    return -0.5 * b - half, -0.5 * b + half


def ratio_slope(lam1, d1, lamj, dj):
    """First-order coefficient of lam_j / lam_1 given the corrections d1, dj."""
    if not lam1 > 0:
        raise InvalidArgumentError(f'Invalid first eigenvalue: {lam1}')
    return (dj * lam1 - d1 * lamj) / (lam1 * lam1)


def clusters(values, gap_tol_rel=None):
    """Index groups of consecutive eigenvalues closer than the gap tolerance."""
    groups = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[i - 1] <= _gap_tol(values[i - 1], gap_tol_rel):
            groups[-1].append(i)
        else:
            groups.append([i])
    return [tuple(g) for g in groups]


@dataclasses.dataclass(frozen=True, eq=False)
class FirstOrder:
    values: np.ndarray
    corrections: np.ndarray
    fmatrix: np.ndarray
    clusters: Tuple[Tuple[int, ...], ...]
    sign: int = 1  # the sign of eps the corrections are valid for

    @property
    def x_slope(self):
        return ratio_slope(self.values[0], self.corrections[0], self.values[1], self.corrections[1])

    @property
    def y_slope(self):
        return ratio_slope(self.values[0], self.corrections[0], self.values[2], self.corrections[2])

    def ratios(self, eps):
        lam = self.values + eps * self.corrections
        return float(lam[1] / lam[0]), float(lam[2] / lam[0])


def first_order(values, fmatrix, k=4, sign=1, gap_tol_rel=None):
    """
    Corrections of the k lowest eigenvalues. Inside a cluster of equal eigenvalues the
    perturbed eigenvalues are ordered, so for eps < 0 the roots attach in reverse order.
    """
    if sign not in (1, -1):
        raise InvalidArgumentError(f'Invalid sign: {sign}')
    values = np.asarray(values, dtype=float)
    fmatrix = np.asarray(fmatrix, dtype=float)
    corrections = np.empty(len(values))
    groups = clusters(values, gap_tol_rel)
    for g in groups:
        if len(g) == 1:
            j = g[0]
            corrections[j] = first_order_simple(values, j, fmatrix[j, j], gap_tol_rel)
            continue
        if len(g) == 2:
            i, j = g
            mu = np.array(first_order_double(fmatrix[i, i], fmatrix[j, j], fmatrix[i, j]))
        else:
            idx = np.array(g)
            mu = np.linalg.eigvalsh(-fmatrix[np.ix_(idx, idx)])
        corrections[list(g)] = mu if sign > 0 else mu[::-1]
    keep = tuple(g for g in groups if g[0] < k)
    return FirstOrder(values[:k], corrections[:k], fmatrix[:k, :k], keep, sign)


def rectangle_first_order(a, field, sign=1, k=4, gap_tol_rel=None):
    """First-order corrections of the k lowest eigenvalues of [0,1] x [0,a] from closed-form F."""
    # two extra modes complete any cluster that straddles index k
    modes = rectangle_modes(a, k + 2)
    values = np.array([lam for lam, _, _ in modes])
    pairs = [(m, n) for _, m, n in modes]
    fm = np.array([[rectangle_f_pq(a, p, q, field) for q in pairs] for p in pairs])
    out = first_order(values, fm, k + 2, sign, gap_tol_rel)
    return FirstOrder(out.values[:k], out.corrections[:k], out.fmatrix[:k, :k],
                      tuple(g for g in out.clusters if g[0] < k), sign)


def mesh_first_order(m, spectrum, field, sign=1, gap_tol_rel=None):
    """First-order corrections from the discrete eigenpairs of a mesh."""
    fm = mesh_f_matrix(m, spectrum.vectors, field)
    return first_order(spectrum.values, fm, spectrum.k, sign, gap_tol_rel)


@dataclasses.dataclass(frozen=True, eq=False)
class FemSlopes:
    eps: float
    values: np.ndarray  # rows: -eps, 0, +eps

    @property
    def central(self):
        return (self.values[2] - self.values[0]) / (2.0 * self.eps)

    @property
    def forward(self):
        return (self.values[2] - self.values[1]) / self.eps

    @property
    def backward(self):
        return (self.values[1] - self.values[0]) / self.eps

    @property
    def ratios(self):
        """(x, y) at -eps, 0, +eps."""
        return np.column_stack([self.values[:, 1] / self.values[:, 0], self.values[:, 2] / self.values[:, 0]])

    @property
    def y_slope(self):
        y = self.ratios[:, 1]
        return float((y[2] - y[0]) / (2.0 * self.eps))

    @property
    def x_slope(self):
        x = self.ratios[:, 0]
        return float((x[2] - x[0]) / (2.0 * self.eps))


def fem_slopes(field, eps=1e-3, level=3, k=4, mesh=None):
    """
    Finite-difference eigenvalue derivatives on [0,1] x [0,a]: one mesh of the rectangle is
    morphed by x -> x + t V(x) for t = -eps, 0, eps, V the field's displacement.
    """
    if not eps > 0:
        raise InvalidArgumentError(f'Invalid step: {eps}')
    m = mesh_for(make_rectangle(field.a), level) if mesh is None else mesh
    v = field.displacement(m.points)
    rows = []
    for t in (-eps, 0.0, eps):
        rows.append(smallest_eigenpairs(assemble(m.with_points(m.points + t * v)), k).values)
    logger.info('FEM slopes on %r at eps = %g', m, eps)
    return FemSlopes(eps, np.array(rows))


def cosine_field(c0, c1, c2):
    """The cosine family on R_sqrt(8/3) that keeps lam3 = lam4 to first order."""
    return RectangleField(SQRT_8_3, (c0, c1, c2, c1, 9.0 * c2 - 8.0 * SQRT2 * c0))


def rectangle_cosine_check(c0, c1, c2, fem=False, eps=1e-3, level=3):
    """
    The lam3/lam1 slope along a top-edge cosine perturbation of R_sqrt(8/3) that keeps the
    double eigenvalue unsplit, from closed-form integrals and optionally from the FEM.
    """
    field = cosine_field(c0, c1, c2)
    a = field.a
    fo = rectangle_first_order(a, field)
    fm = fo.fmatrix
    scale = max(np.abs(fm).max(), 1e-300)
    report = {
        'a': a,
        'coefficients': dict(zip(('c0', 'c1', 'c2', 'c3', 'c4'), field.cos)),
        'F': {'F11': fm[0, 0], 'F22': fm[1, 1], 'F33': fm[2, 2], 'F44': fm[3, 3], 'F34': fm[2, 3]},
        'corrections': [float(c) for c in fo.corrections],
        'slope': COSINE_SLOPE * (c2 - SQRT2 * c0),
        'first_order_slope': fo.y_slope,
        'double_preserved': bool(abs(fm[2, 2] - fm[3, 3]) <= 1e-10 * scale and abs(fm[2, 3]) <= 1e-10 * scale),
    }
    report['slope_matches'] = bool(abs(report['first_order_slope'] - report['slope'])
                                   <= 1e-8 * max(1.0, abs(report['slope'])))
    if fem:
        s = fem_slopes(field, eps=eps, level=level)
        y = s.ratios[:, 1]
        report.update({
            'eps': eps,
            'level': level,
            'fem_slope': s.y_slope,
            'fem_values': s.values.tolist(),
            'y_minus': float(y[0]), 'y_zero': float(y[1]), 'y_plus': float(y[2]),
            # y(+eps) above the rectangle's optimum: the rectangle is not a local maximiser
            'witness': bool(y[2] > 35.0 / 11.0 and y[2] > y[1]),
        })
        if report['slope'] != 0:
            report['fem_relative_error'] = abs(s.y_slope - report['slope']) / abs(report['slope'])
            report['fem_matches'] = bool(report['fem_relative_error'] <= 0.02)
    return report


def _curve_slope(x):
    return 8.0 / 3.0 if x < 20.0 / 11.0 else -1.0


def quadrilateral_tangency_check(a, p=0.0, q=0.0, r=0.0, eps=1e-3, sign=1):
    """
    First-order motion of (x, y) when [0,1] x [0,a] is moved by the linear field
    p + q x1 + r x2, compared with the slope of the rectangle curve at x.
    """
    field = RectangleField(a, (), (p, q, r))
    fo = rectangle_first_order(a, field, sign=sign)
    x, y = fo.ratios(0.0)
    xs, ys = fo.x_slope, fo.y_slope
    t = sign * eps
    x_eps, y_eps = x + t * xs, y + t * ys
    pair = next((g for g in fo.clusters if 2 in g and len(g) > 1), None)
    double = pair is not None
    report = {
        'a': a,
        'field': {'p': p, 'q': q, 'r': r},
        'x': x, 'y': y,
        'x_slope': xs, 'y_slope': ys,
        'x_eps': x_eps, 'y_eps': y_eps,
        'double': double,
        'F_pair': float(fo.fmatrix[pair[0], pair[1]]) if double else None,
        'dydx': ys / xs if xs != 0 else None,
    }
    if double:
        # lam3 is double: the curve has a kink or an end point at x, so only stay below it
        report['curve_slope'] = None
        report['below_curve'] = bool(y_eps <= rectangle_curve(min(max(x_eps, 1.0), 2.5)) + 1e-12)
        report['tangent'] = bool(abs(report['F_pair']) <= 1e-12 * max(1.0, np.abs(fo.fmatrix).max()))
    else:
        slope = _curve_slope(x)
        report['curve_slope'] = slope
        report['tangent'] = report['dydx'] is None or abs(report['dydx'] - slope) <= 1e-6
    return report
