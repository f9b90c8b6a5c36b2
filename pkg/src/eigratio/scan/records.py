import csv
import dataclasses
import json
import math
from typing import Optional, Tuple

import numpy as np

from ..analytic import k2
from ..errors import InvalidArgumentError

# records above K2 + X_SLACK are treated as probable discretisation failures
X_SLACK = 0.02
# x = lam2/lam1 >= 1 up to round-off
X_FLOOR_TOL = 1e-9


@dataclasses.dataclass(frozen=True)
class ScanRecord:
    id: int
    class_tag: str
    params: Tuple[Tuple[str, float], ...]
    seed: Optional[int]
    lams: Tuple[float, float, float, float]
    level: int
    residual: float
    components: int = 1
    lams_extrapolated: Optional[Tuple[float, ...]] = None
    generator: str = 'builder'

    @property
    def x(self):
        return self.lams[1] / self.lams[0]

    @property
    def y(self):
        return self.lams[2] / self.lams[0]

    @property
    def delta4(self):
        return (self.lams[3] - self.lams[2]) / self.lams[2]

    @property
    def param_dict(self):
        return dict(self.params)

    @property
    def suspicious(self):
        return self.x > k2() + X_SLACK or self.x < 1.0 - X_FLOOR_TOL

    def with_solution(self, lams, level, residual, lams_extrapolated=None):
        return dataclasses.replace(self, lams=tuple(float(v) for v in lams[:4]), level=level, residual=residual,
                                   lams_extrapolated=lams_extrapolated)


@dataclasses.dataclass(frozen=True)
class SkipEvent:
    id: int
    class_tag: str
    params: Tuple[Tuple[str, float], ...]
    seed: Optional[int]
    stage: str
    message: str


@dataclasses.dataclass(frozen=True)
class BinTable:
    dx: float
    bins: dict  # bin index -> ScanRecord with the largest y

    def bin_range(self, i):
        if i == top_bin(self.dx):
            return 1.0 + i * self.dx, k2() + X_SLACK
        return 1.0 + i * self.dx, 1.0 + (i + 1) * self.dx

    def rows(self):
        return [(i, *self.bin_range(i), self.bins[i]) for i in sorted(self.bins)]

    def best(self):
        return [self.bins[i] for i in sorted(self.bins)]


def top_bin(dx):
    """The last bin; it runs up to K2 + X_SLACK."""
    return int(math.floor((k2() - 1.0) / dx))


def bin_index(x, dx):
    return min(max(int(math.floor((x - 1.0) / dx)), 0), top_bin(dx))


def bin_max(records, dx):
    """Per bin [1 + i dx, 1 + (i+1) dx) the record with the largest y; the top bin is
    closed at K2 + X_SLACK and suspicious records are left out."""
    if not dx > 0:
        raise InvalidArgumentError(f'Invalid bin width: {dx}')
    bins = {}
    for r in records:
        if r.suspicious:
            continue
        i = bin_index(r.x, dx)
        if i not in bins or r.y > bins[i].y:
            bins[i] = r
    return BinTable(dx, bins)


@dataclasses.dataclass(frozen=True)
class Summary:
    class_tag: str
    count: int
    y_star: float
    delta4: float
    argmax: ScanRecord


def summarize(records, class_tag=None):
    records = list(records)
    if not records:
        raise InvalidArgumentError('cannot summarize an empty record list')
    best = max(records, key=lambda r: (r.y, -r.id))
    tag = class_tag or (records[0].class_tag if len({r.class_tag for r in records}) == 1 else 'all')
    return Summary(tag, len(records), best.y, best.delta4, best)


def write_header(f, meta):
    """`# key: value` lines; non-string values as sorted JSON."""
    for key, value in (meta or {}).items():
        text = value if isinstance(value, str) else json.dumps(value, sort_keys=True, default=str)
        f.write(f'# {key}: {text}\n')


def _param_names(records):
    names = []
    for r in records:
        for name, _ in r.params:
            if name not in names:
                names.append(name)
    return names


def _fmt(v):
    if v is None:
        return ''
    if isinstance(v, (float, np.floating)):
        return repr(float(v)) if np.isfinite(v) else 'nan'
    return str(v)


def write_records(path, records, meta=None):
    records = list(records)
    names = _param_names(records)
    extrapolated = any(r.lams_extrapolated is not None for r in records)
    columns = ['id', 'class', 'generator', 'seed'] + names + \
              ['lam1', 'lam2', 'lam3', 'lam4', 'x', 'y', 'delta4', 'level', 'residual', 'components']
    if extrapolated:
        columns += ['lam1_extrap', 'lam2_extrap', 'lam3_extrap', 'lam4_extrap']
    with open(path, 'w', newline='', encoding='utf-8') as f:
        write_header(f, meta)
        w = csv.writer(f, lineterminator='\n')
        w.writerow(columns)
        for r in records:
            p = r.param_dict
            row = [r.id, r.class_tag, r.generator, r.seed] + [p.get(n) for n in names] + list(r.lams) + \
                  [r.x, r.y, r.delta4, r.level, r.residual, r.components]
            if extrapolated:
                row += list(r.lams_extrapolated) if r.lams_extrapolated is not None else [None] * 4
            w.writerow([_fmt(v) for v in row])


def read_records(path):
    """Records back from a results CSV; '#' header lines are skipped."""
    with open(path, encoding='utf-8') as f:
        lines = [line for line in f if not line.startswith('#')]
    reader = csv.DictReader(lines)
    fixed = {'id', 'class', 'generator', 'seed', 'lam1', 'lam2', 'lam3', 'lam4', 'x', 'y', 'delta4', 'level',
             'residual', 'components', 'lam1_extrap', 'lam2_extrap', 'lam3_extrap', 'lam4_extrap'}
    out = []
    for row in reader:
        params = tuple((k, float(v)) for k, v in row.items() if k not in fixed and v != '')
        extrap = None
        if row.get('lam1_extrap'):
            extrap = tuple(float(row[f'lam{i}_extrap']) for i in range(1, 5))
        out.append(ScanRecord(int(row['id']), row['class'], params, int(row['seed']) if row['seed'] else None,
                              tuple(float(row[f'lam{i}']) for i in range(1, 5)), int(row['level']),
                              float(row['residual']), int(row.get('components') or 1), extrap,
                              row.get('generator') or 'builder'))
    return out


def write_bins(path, table, meta=None):
    with open(path, 'w', newline='', encoding='utf-8') as f:
        write_header(f, meta)
        w = csv.writer(f, lineterminator='\n')
        w.writerow(['bin', 'x_lo', 'x_hi', 'id', 'x', 'y', 'delta4'])
        for i, lo, hi, r in table.rows():
            w.writerow([_fmt(v) for v in (i, lo, hi, r.id, r.x, r.y, r.delta4)])


def write_summary(path, summaries, meta=None):
    with open(path, 'w', newline='', encoding='utf-8') as f:
        write_header(f, meta)
        w = csv.writer(f, lineterminator='\n')
        w.writerow(['type', 'experiments', 'y_star', 'delta4', 'argmax_id'])
        for s in summaries:
            w.writerow([_fmt(v) for v in (s.class_tag, s.count, s.y_star, s.delta4, s.argmax.id)])


def write_skips(path, skips, meta=None):
    with open(path, 'w', newline='', encoding='utf-8') as f:
        write_header(f, meta)
        w = csv.writer(f, lineterminator='\n')
        w.writerow(['id', 'class', 'seed', 'stage', 'message'])
        for s in skips:
            w.writerow([_fmt(v) for v in (s.id, s.class_tag, s.seed, s.stage, s.message)])
