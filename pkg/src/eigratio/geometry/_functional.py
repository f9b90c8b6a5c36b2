import math

import numpy as np


def orient(a, b, c):
    """Twice the signed area of (a, b, c); broadcasts over leading axes."""
    a, b, c = np.asarray(a, dtype=float), np.asarray(b, dtype=float), np.asarray(c, dtype=float)
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])


def _within_box(p, q, r, tol):
    # r inside the axis-aligned box spanned by p, q
    lo = np.minimum(p, q) - tol
    hi = np.maximum(p, q) + tol
    return np.all((r >= lo) & (r <= hi), axis=-1)


def segments_intersect(a, b, c, d, eps=1e-12, scale=1.0):
    """
    Closed-segment intersection test between [a, b] and [c, d].
    Orientation values below eps*scale**2 count as collinear, so touching and
    overlapping segments are reported as intersecting.
    """
    a, b, c, d = (np.asarray(v, dtype=float) for v in (a, b, c, d))
    tol = eps * scale * scale
    d1 = orient(c, d, a)
    d2 = orient(c, d, b)
    d3 = orient(a, b, c)
    d4 = orient(a, b, d)
    proper = (((d1 > tol) & (d2 < -tol)) | ((d1 < -tol) & (d2 > tol))) & \
             (((d3 > tol) & (d4 < -tol)) | ((d3 < -tol) & (d4 > tol)))
    btol = eps * scale
    touch = ((np.abs(d1) <= tol) & _within_box(c, d, a, btol)) | \
            ((np.abs(d2) <= tol) & _within_box(c, d, b, btol)) | \
            ((np.abs(d3) <= tol) & _within_box(a, b, c, btol)) | \
            ((np.abs(d4) <= tol) & _within_box(a, b, d, btol))
    return proper | touch


def signed_area(vertices):
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def loop_scale(vertices):
    v = np.asarray(vertices, dtype=float)
    return float(max(np.ptp(v[:, 0]), np.ptp(v[:, 1]), 1e-300))


def interior_angles(vertices):
    """
    Interior angle at every vertex of a loop, assuming the region lies to the
    left of the walk (outer loops ccw, holes cw).
    """
    v = np.asarray(vertices, dtype=float)
    e_in = v - np.roll(v, 1, axis=0)
    e_out = np.roll(v, -1, axis=0) - v
    cross = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
    dot = np.einsum('ij,ij->i', e_in, e_out)
    return math.pi - np.arctan2(cross, dot)


def vertex_angle(prev, vertex, nxt):
    """Unsigned angle in [0, pi] between the two edges meeting at `vertex`."""
    u = np.asarray(prev, dtype=float) - np.asarray(vertex, dtype=float)
    w = np.asarray(nxt, dtype=float) - np.asarray(vertex, dtype=float)
    nu, nw = np.hypot(*u), np.hypot(*w)
    if nu == 0.0 or nw == 0.0:
        return 0.0
    c = float(np.clip(np.dot(u, w) / (nu * nw), -1.0, 1.0))
    return math.acos(c)


def loop_segments(vertices):
    v = np.asarray(vertices, dtype=float)
    return np.stack([v, np.roll(v, -1, axis=0)], axis=1)  # (n, 2, 2)


def crossing_pairs(loops, eps=1e-12):
    """
    All pairs of boundary segments that intersect although they are not
    neighbours on the same loop. Segments are numbered loop after loop.
    """
    segs, owner, local, sizes = [], [], [], []
    for li, loop in enumerate(loops):
        s = loop_segments(loop)
        segs.append(s)
        owner.append(np.full(len(s), li))
        local.append(np.arange(len(s)))
        sizes.append(len(s))
    segs = np.concatenate(segs)
    owner = np.concatenate(owner)
    local = np.concatenate(local)
    scale = max(loop_scale(loop) for loop in loops)

    i, j = np.triu_indices(len(segs), k=1)
    same = owner[i] == owner[j]
    n_loop = np.asarray(sizes)[owner[i]]
    gap = np.abs(local[i] - local[j])
    adjacent = same & ((gap == 1) | (gap == n_loop - 1))
    i, j = i[~adjacent], j[~adjacent]
    hit = segments_intersect(segs[i, 0], segs[i, 1], segs[j, 0], segs[j, 1], eps=eps, scale=scale)
    return list(zip(i[hit].tolist(), j[hit].tolist()))


def drop_duplicates(vertices, tol):
    """Remove consecutive (cyclic) vertices closer than tol."""
    v = np.asarray(vertices, dtype=float)
    keep = [0]
    for k in range(1, len(v)):
        if np.hypot(*(v[k] - v[keep[-1]])) > tol:
            keep.append(k)
    while len(keep) > 1 and np.hypot(*(v[keep[-1]] - v[keep[0]])) <= tol:
        keep.pop()
    return v[keep]


def arc(center, radius, start, stop, n_chords):
    """n_chords + 1 points on a circular arc from angle start to stop (inclusive)."""
    t = np.linspace(start, stop, n_chords + 1)
    return np.column_stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)])


def circle(center, radius, n_points):
    t = 2.0 * math.pi * np.arange(n_points) / n_points
    return np.column_stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)])


def chords_for(angle, arc_segments, minimum=4):
    """Chord count for an arc so that its chord angle matches a full circle of arc_segments."""
    return max(minimum, int(math.ceil(arc_segments * abs(angle) / (2.0 * math.pi) - 1e-9)))
