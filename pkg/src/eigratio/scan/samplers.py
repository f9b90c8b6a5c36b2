"""
Deterministic work lists for a scan plan: cyclic grids for the low-dimensional
classes, seeded draws for everything else. Every random item carries its own seed
(spawned from the plan's master seed), so a record can be rebuilt from its row alone.
"""
import dataclasses
import itertools
import logging
import math
from typing import Optional, Tuple

import numpy as np

from .. import geometry
from ..errors import InvalidArgumentError
from ..settings import get_settings
from .plan import class_info

logger = logging.getLogger(__name__)

DIFFERENCE_KINDS = ('rect_minus_star', 'star_minus_rect', 'star_minus_star')


@dataclasses.dataclass(frozen=True)
class WorkItem:
    id: int
    class_tag: str
    params: Tuple[Tuple[str, float], ...]  # API units (radians)
    seed: Optional[int] = None
    generator: str = 'builder'

    @property
    def param_dict(self):
        return dict(self.params)


def _axis(spec):
    start, stop, step = (float(v) for v in spec)
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 12)


def _to_radians(class_tag, params):
    degrees = set(class_info(class_tag).get('degrees', ()))
    return tuple((k, math.radians(v) if k in degrees else float(v)) for k, v in params)


def _floor_deg():
    return math.degrees(get_settings().min_angle_floor)


def angle_pairs(first, second, dedupe=False):
    """Grid pairs of base angles (degrees) whose triangle has every angle strictly above the floor."""
    floor = _floor_deg()
    a, b = np.meshgrid(_axis(first), _axis(second), indexing='ij')
    a, b = a.ravel(), b.ravel()
    c = 180.0 - a - b
    ok = (a > floor + 1e-9) & (b > floor + 1e-9) & (c > floor + 1e-9)
    if dedupe:
        # congruent triangles: keep a <= b <= c
        ok &= (a <= b + 1e-9) & (b <= c + 1e-9)
    return np.column_stack([a[ok], b[ok]])


def _apex(pairs, lower=False):
    a, b = np.radians(pairs[:, 0]), np.radians(pairs[:, 1])
    side = np.sin(b) / np.sin(a + b)
    return np.column_stack([side * np.cos(a), (-1.0 if lower else 1.0) * side * np.sin(a)])


class GridCycle:
    """Lazily indexed cyclic grid of parameter tuples (plan units)."""

    def __init__(self, plan):
        self.class_tag = plan.class_tag
        info = class_info(plan.class_tag)
        names = info.get('params')
        if not names:
            raise InvalidArgumentError(f'class {plan.class_tag} has no grid parameterisation')
        self.names = list(names)
        missing = [n for n in self.names if n not in plan.grid]
        if missing:
            raise InvalidArgumentError(f'grid lacks parameter(s): {", ".join(missing)}')
        dedupe = bool(plan.options.get('dedupe', False))
        self._combos = None
        if plan.class_tag == 'triangle':
            self._axes = [angle_pairs(plan.grid['alpha'], plan.grid['beta'], dedupe)]
        elif plan.class_tag == 'quadrilateral':
            upper = angle_pairs(plan.grid['alpha'], plan.grid['beta'])
            lower = angle_pairs(plan.grid['gamma'], plan.grid['delta'])
            self._axes = [upper, lower]
            if dedupe:
                self._combos = self._canonical_quadrilaterals(upper, lower)
        else:
            self._axes = [_axis(plan.grid[n])[:, None] for n in self.names]
        self._sizes = [len(a) for a in self._axes]

    @staticmethod
    def _canonical_quadrilaterals(upper, lower):
        # one representative per pair of diagonals: the base diagonal is the longer one,
        # ties and the upper/lower mirror broken by index order
        p, q = _apex(upper), _apex(lower, lower=True)
        same = upper.shape == lower.shape and np.array_equal(upper, lower)
        keep = []
        for i in range(len(upper)):
            other = np.hypot(p[i, 0] - q[:, 0], p[i, 1] - q[:, 1])
            ok = other <= 1.0 + 1e-12
            if same:
                ok &= np.arange(len(lower)) >= i
            keep.append(np.column_stack([np.full(int(ok.sum()), i), np.flatnonzero(ok)]))
        return np.concatenate(keep)

    def __len__(self):
        if self._combos is not None:
            return len(self._combos)
        return int(np.prod(self._sizes))

    def __getitem__(self, k):
        if self._combos is not None:
            idx = self._combos[k]
        else:
            idx = np.unravel_index(k, self._sizes)
        values = np.concatenate([axis[i] for axis, i in zip(self._axes, idx)])
        return tuple(zip(self.names, (float(v) for v in values)))


def strided(total, count):
    """`count` evenly spread indices out of range(total), all of them when count is None or large."""
    if count is None or count >= total:
        return range(total)
    return [k * total // count for k in range(count)]


def item_seeds(master, count):
    children = np.random.SeedSequence(master).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def _pick_int(rng, spec):
    if isinstance(spec, (list, tuple)):
        return int(rng.integers(int(spec[0]), int(spec[1]) + 1))
    return int(spec)


def _random_item(plan, k, seed):
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    tag, opts = plan.class_tag, plan.options
    if tag == 'polygon':
        if rng.random() < float(opts.get('perturbed_fraction', 0.0)):
            lo, hi = plan.ranges.get('a', (1.0, 5.0))
            params = (('a', float(rng.uniform(lo, hi))), ('n_extra', float(_pick_int(rng, [1, 8]))))
            return WorkItem(k, tag, params, seed, 'perturbed')
        return WorkItem(k, tag, (('n', float(_pick_int(rng, opts.get('n', 6)))),), seed, 'polygon')
    if tag == 'star':
        params = (('n', float(_pick_int(rng, opts.get('n', 13)))), ('r1', float(opts.get('r1', 0.5))),
                  ('r2', float(opts.get('r2', 1.0))))
        return WorkItem(k, tag, params, seed, 'star')
    if tag == 'difference':
        kind = opts.get('kind', 'rect_minus_star')
        if kind == 'mixed':
            kind = DIFFERENCE_KINDS[int(rng.integers(len(DIFFERENCE_KINDS)))]
        if kind not in DIFFERENCE_KINDS:
            raise InvalidArgumentError(f'Invalid difference kind: {kind}')
        n = opts.get('n', [4, 30])
        if kind == 'star_minus_star':
            params = (('n1', float(_pick_int(rng, n))), ('n2', float(_pick_int(rng, n))))
        else:
            params = (('n', float(_pick_int(rng, n))),)
        return WorkItem(k, tag, params, seed, kind)

    names = class_info(tag).get('params')
    if not names:
        raise InvalidArgumentError(f'class {tag} cannot be sampled at random')
    values = {}
    for name in names:
        if name not in plan.ranges:
            raise InvalidArgumentError(f'no sampling range for {tag}.{name}')
        lo, hi = plan.ranges[name]
        values[name] = float(rng.uniform(lo, hi))
    if tag == 'jigsaw':
        values['cx'] *= values['a']  # drawn as a fraction of the long side
    params = _to_radians(tag, tuple((n, values[n]) for n in names))
    return WorkItem(k, tag, params, seed, 'builder')


def generate(plan):
    """The full, deterministic work list of a plan."""
    if plan.count == 0:
        return []
    if plan.sampler == 'grid':
        cycle = GridCycle(plan)
        indices = strided(len(cycle), plan.count)
        items = [WorkItem(n, plan.class_tag, _to_radians(plan.class_tag, cycle[k]))
                 for n, k in enumerate(indices)]
    else:
        items = [_random_item(plan, n, seed) for n, seed in enumerate(item_seeds(plan.seed, plan.count))]
    logger.info('plan %s/%s: %d work items', plan.class_tag, plan.sampler, len(items))
    return items


def local_rescan(class_tag, center, radius, step, start_id=0):
    """
    Grid neighbourhood (box of half-width `radius`, spacing `step`, plan units) around a
    parameter point given in API units. Inadmissible and central points are dropped.
    """
    info = class_info(class_tag)
    names = info.get('params')
    if not names:
        raise InvalidArgumentError(f'class {class_tag} has no continuous parameterisation')
    degrees = set(info.get('degrees', ()))
    center = dict(center)
    plan_center = {n: math.degrees(center[n]) if n in degrees else center[n] for n in names}
    offsets = _axis([-radius, radius, step])
    box = info.get('box', {})
    floor = _floor_deg()
    items, k = [], start_id
    for delta in itertools.product(offsets, repeat=len(names)):
        if not any(abs(d) > 1e-12 for d in delta):
            continue
        point = {n: plan_center[n] + d for n, d in zip(names, delta)}
        if any(not box[n][0] <= point[n] <= box[n][1] for n in names if n in box):
            continue
        if class_tag in ('triangle', 'quadrilateral'):
            pairs = [('alpha', 'beta'), ('gamma', 'delta')][:len(names) // 2]
            if any(180.0 - point[a] - point[b] <= floor for a, b in pairs):
                continue
        items.append(WorkItem(k, class_tag, _to_radians(class_tag, tuple((n, point[n]) for n in names))))
        k += 1
    return items


def build_domains(item):
    """Domain component(s) of a work item; more than one only for disconnected differences."""
    p = item.param_dict
    if item.generator == 'builder':
        return [geometry.build(item.class_tag, p)]
    if item.generator == 'polygon':
        return [geometry.random_simple_polygon(int(p['n']), item.seed)]
    if item.generator == 'perturbed':
        return [geometry.perturbed_rectangle(p['a'], item.seed, n_extra=int(p['n_extra']))]
    if item.generator == 'star':
        return [geometry.random_star_polygon(int(p['n']), p['r1'], p['r2'], item.seed)]
    if item.generator == 'rect_minus_star':
        return geometry.rect_minus_star(int(p['n']), item.seed)
    if item.generator == 'star_minus_rect':
        return geometry.star_minus_rect(int(p['n']), item.seed)
    if item.generator == 'star_minus_star':
        return geometry.star_minus_star(int(p['n1']), int(p['n2']), item.seed)
    raise InvalidArgumentError(f'unknown generator: {item.generator}')
