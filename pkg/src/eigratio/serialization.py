import json
import logging
import math

import numpy as np

from .eig import Spectrum
from .errors import InvalidArgumentError
from .geometry import Domain, PolyLoop, build
from .meshgen import Mesh
from .scan.plan import class_info

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def domain_to_dict(d):
    return {
        'format': FORMAT_VERSION,
        'class': d.class_tag,
        'params': d.param_dict,
        'arc_segments': d.arc_segments,
        'outer': d.outer.vertices.tolist(),
        'holes': [h.vertices.tolist() for h in d.holes],
    }


def domain_from_dict(data):
    """
    A domain from its mapping. With `outer` the loops are taken as stored; otherwise the
    class builder is called with `params` (angles in radians, or degrees with
    "units": "degrees").
    """
    if not isinstance(data, dict):
        raise InvalidArgumentError('a domain description must be a mapping')
    tag = data.get('class', 'custom')
    params = dict(data.get('params') or {})
    if 'outer' in data:
        try:
            return Domain(PolyLoop(data['outer']), tuple(PolyLoop(h) for h in data.get('holes') or ()), tag,
                          params, int(data.get('arc_segments', 256)))
        except (TypeError, KeyError) as e:
            raise InvalidArgumentError(f'malformed domain loops: {e}') from e
    if data.get('units', 'radians') == 'degrees':
        degrees = set(class_info(tag).get('degrees', ()))
        params = {k: math.radians(v) if k in degrees else v for k, v in params.items()}
    return build(tag, params)


def save_domain(d, path):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(domain_to_dict(d), f, indent=2)
        f.write('\n')


def load_domain(path):
    try:
        with open(path, encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise InvalidArgumentError(f'cannot parse domain file {path}: {e}') from e
    d = domain_from_dict(data)
    logger.info('loaded %r from %s', d, path)
    return d


def dump_mesh(m, path):
    """Plain-text mesh: 'NP NT', then one 'x y b' line per point and one 'i j k' line per triangle (0-based)."""
    with open(path, 'w', encoding='utf-8') as f:
        f.write(f'{m.n_points} {m.n_triangles}\n')
        for (x, y), b in zip(m.points, m.boundary_mask):
            f.write(f'{float(x)!r} {float(y)!r} {int(b)}\n')
        for i, j, k in m.triangles:
            f.write(f'{i} {j} {k}\n')


def load_mesh(path):
    with open(path, encoding='utf-8') as f:
        lines = [line for line in f if not line.startswith('#') and line.strip()]
    try:
        n, t = (int(v) for v in lines[0].split()[:2])
        points = np.loadtxt(lines[1:1 + n], ndmin=2)
        triangles = np.loadtxt(lines[1 + n:1 + n + t], dtype=np.int64, ndmin=2)
    except (ValueError, IndexError) as e:
        raise InvalidArgumentError(f'malformed mesh file {path}: {e}') from e
    return Mesh(points[:, :2], triangles, points[:, 2].astype(bool))


def save_spectrum(spectrum, f):
    np.savez(f, values=spectrum.values, vectors=spectrum.vectors, residuals=spectrum.residuals)


def load_spectrum(f):
    with np.load(f, allow_pickle=False) as data:
        return Spectrum(data['values'], data['vectors'], data['residuals'])
