import dataclasses
import functools
import logging
import os
from importlib import resources
from typing import Optional

import yaml

from ..errors import InvalidArgumentError

logger = logging.getLogger(__name__)

SEED_ENV = 'SPECTRA_SEED'
SAMPLERS = ('grid', 'random')


@functools.lru_cache(maxsize=None)
def class_registry():
    """Class metadata from the packaged classes.yaml."""
    text = resources.files('eigratio').joinpath('data/classes.yaml').read_text(encoding='utf-8')
    return yaml.safe_load(text)


def class_info(class_tag):
    try:
        return class_registry()[class_tag]
    except KeyError:
        raise InvalidArgumentError(f'unknown domain class: {class_tag!r}') from None


@dataclasses.dataclass(frozen=True)
class ScanPlan:
    class_tag: str
    sampler: str = 'random'
    count: Optional[int] = None  # None: the full grid cycle
    seed: int = 0
    level: int = 2
    dx: float = 0.05
    confirm_level: int = 3
    confirm_margin: float = 0.05
    extrapolate: bool = False
    grid: dict = dataclasses.field(default_factory=dict)
    ranges: dict = dataclasses.field(default_factory=dict)
    options: dict = dataclasses.field(default_factory=dict)

    def to_dict(self):
        return dataclasses.asdict(self)


_FIELDS = {f.name for f in dataclasses.fields(ScanPlan)}


def plan_from_dict(data, seed=None):
    """
    Validate a plan mapping and fill class defaults. The `class` key may be used for
    `class_tag`; `seed` overrides the plan seed, then SPECTRA_SEED, then the file.
    """
    if not isinstance(data, dict):
        raise InvalidArgumentError('a plan must be a mapping')
    data = dict(data)
    if 'class' in data:
        data['class_tag'] = data.pop('class')
    unknown = set(data) - _FIELDS
    if unknown:
        raise InvalidArgumentError(f'unknown plan key(s): {", ".join(sorted(unknown))}')
    if 'class_tag' not in data:
        raise InvalidArgumentError('plan has no class')
    info = class_info(data['class_tag'])

    if seed is not None:
        data['seed'] = int(seed)
    elif os.environ.get(SEED_ENV):
        try:
            data['seed'] = int(os.environ[SEED_ENV])
        except ValueError:
            raise InvalidArgumentError(f'{SEED_ENV} is not an integer: {os.environ[SEED_ENV]!r}') from None

    data.setdefault('sampler', info.get('sampler', 'random'))
    data['grid'] = {**info.get('grid', {}), **(data.get('grid') or {})}
    data['ranges'] = {**info.get('ranges', {}), **(data.get('ranges') or {})}
    data['options'] = {**info.get('options', {}), **(data.get('options') or {})}
    if 'rescan' in info and 'rescan' in data['options'] and data['options']['rescan'] is True:
        data['options']['rescan'] = dict(info['rescan'])
    plan = ScanPlan(**data)

    if plan.sampler not in SAMPLERS:
        raise InvalidArgumentError(f'Invalid sampler: {plan.sampler}')
    if plan.sampler == 'grid' and not plan.grid:
        raise InvalidArgumentError(f'class {plan.class_tag} has no grid definition')
    if plan.count is not None and (not isinstance(plan.count, int) or plan.count < 0):
        raise InvalidArgumentError(f'Invalid count: {plan.count}')
    if plan.sampler == 'random' and plan.count is None:
        raise InvalidArgumentError('random sampling needs a count')
    if plan.level < 0 or plan.confirm_level < 0:
        raise InvalidArgumentError(f'Invalid refinement levels: {plan.level}, {plan.confirm_level}')
    if not plan.dx > 0:
        raise InvalidArgumentError(f'Invalid bin width: {plan.dx}')
    for name, spec in plan.grid.items():
        if len(spec) != 3 or not spec[2] > 0 or spec[1] < spec[0]:
            raise InvalidArgumentError(f'Invalid grid for {name}: {spec}')
    for name, spec in plan.ranges.items():
        if len(spec) != 2 or spec[1] < spec[0]:
            raise InvalidArgumentError(f'Invalid range for {name}: {spec}')
    return plan


def load_plan(path, seed=None):
    """Read a YAML (or JSON) plan file."""
    try:
        with open(path, encoding='utf-8') as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise InvalidArgumentError(f'cannot parse plan {path}: {e}') from e
    logger.info('loaded plan %s', path)
    return plan_from_dict(data, seed=seed)
