import concurrent.futures
import dataclasses
import logging
import warnings
from typing import List

import numpy as np

from ..analytic import disjoint_union_ratios, k2, merge_spectra
from ..eig import solve_domain
from ..errors import EigratioError
from ..settings import get_settings, override
from .records import ScanRecord, SkipEvent, bin_index, bin_max
from .samplers import build_domains, generate, local_rescan

logger = logging.getLogger(__name__)


def _stage(exc):
    name = type(exc).__name__
    return {'GenerationFailedError': 'generation', 'GeometryError': 'geometry',
            'MeshTooCoarseError': 'mesh', 'ConvergenceError': 'eigensolver',
            'NumericalError': 'eigensolver'}.get(name, name)


def solve_item(item, level, extrapolate=False, k=4):
    """Solve one work item; disconnected domains are solved per component and their spectra merged."""
    try:
        parts = build_domains(item)
        values, extrap, residual = [], [], 0.0
        for d in parts:
            sol = solve_domain(d, level=level, k=k, extrapolate=extrapolate)
            values.append(sol.values)
            if extrapolate:
                extrap.append(sol.extrapolated)
            residual = max(residual, float(sol.spectrum.residuals.max()))
        lams = merge_spectra(*values)[:4]
        lams_extrapolated = tuple(float(v) for v in merge_spectra(*extrap)[:4]) if extrapolate else None
    except EigratioError as e:
        logger.debug('item %d skipped: %s', item.id, e)
        return SkipEvent(item.id, item.class_tag, item.params, item.seed, _stage(e), str(e))
    return ScanRecord(item.id, item.class_tag, item.params, item.seed, tuple(float(v) for v in lams), level,
                      residual, len(parts), lams_extrapolated, item.generator)


def _solve_with_settings(settings, item, level, extrapolate):
    # worker processes start from default settings
    with override(**dataclasses.asdict(settings)):
        return solve_item(item, level, extrapolate)


def solve_all(items, level, extrapolate=False, jobs=1):
    """Solve work items, in a process pool when jobs > 1; results come back ordered by item id."""
    if jobs is None or jobs <= 1 or len(items) <= 1:
        results = [solve_item(item, level, extrapolate) for item in items]
    else:
        settings = get_settings()
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_solve_with_settings, settings, item, level, extrapolate) for item in items]
            results = [f.result() for f in futures]
    return sorted(results, key=lambda r: r.id)


@dataclasses.dataclass
class Campaign:
    plan: object
    records: List[ScanRecord]
    skips: List[SkipEvent]
    flagged: List[ScanRecord]
    confirmed: List[int]  # ids re-solved at the confirmation level


def _split(results):
    records, skips, flagged = [], [], []
    for r in results:
        if isinstance(r, SkipEvent):
            skips.append(r)
        elif r.suspicious:
            warnings.warn(f'record {r.id} ({r.class_tag}) has x = {r.x:.4f} outside [1, K2 + 0.02], probable FEM error')
            flagged.append(r)
        else:
            records.append(r)
    return records, skips, flagged


def _rescan(plan, records, jobs, next_id):
    opts = plan.options.get('rescan')
    if not opts or not records:
        return [], []
    threshold = float(opts.get('threshold', 0.0))
    top = int(opts.get('top', 1))
    centers = sorted((r for r in records if r.y >= threshold), key=lambda r: (-r.y, r.id))[:top]
    items = []
    for c in centers:
        new = local_rescan(plan.class_tag, c.params, float(opts['radius']), float(opts['step']), next_id)
        next_id += len(new)
        items.extend(new)
    logger.info('local re-scan around %d records: %d items', len(centers), len(items))
    return items, solve_all(items, plan.level, plan.extrapolate, jobs)


def run_campaign(plan, jobs=1):
    """
    Solve every item of the plan at plan.level, optionally re-scan around the best grid
    points, then re-solve at plan.confirm_level every record within confirm_margin of its
    bin maximum.
    """
    items = generate(plan)
    records, skips, flagged = _split(solve_all(items, plan.level, plan.extrapolate, jobs))
    extra_items, extra_results = _rescan(plan, records, jobs, max((i.id for i in items), default=-1) + 1)
    items_by_id = {item.id: item for item in items + extra_items}
    extra_records, extra_skips, extra_flagged = _split(extra_results)
    records += extra_records
    skips += extra_skips
    flagged += extra_flagged

    confirmed = []
    if plan.confirm_level > plan.level and records:
        table = bin_max(records, plan.dx)
        near = [r for r in records
                if r.y >= table.bins[bin_index(r.x, plan.dx)].y - plan.confirm_margin]
        by_id = {r.id: r for r in records}
        fine, fine_skips, fine_flagged = _split(solve_all([items_by_id[r.id] for r in near], plan.confirm_level,
                                                          plan.extrapolate, jobs))
        for r in fine:
            by_id[r.id] = r
            confirmed.append(r.id)
        for s in fine_skips:
            logger.warning('confirmation of record %d failed (%s), keeping level %d', s.id, s.message, plan.level)
        for r in fine_flagged:
            by_id.pop(r.id, None)
            flagged.append(r)
        records = sorted(by_id.values(), key=lambda r: r.id)
    logger.info('campaign %s: %d records, %d skipped, %d flagged, %d confirmed', plan.class_tag, len(records),
                len(skips), len(flagged), len(confirmed))
    return Campaign(plan, records, skips, flagged, confirmed)


def run_scan(plan, jobs=1):
    return run_campaign(plan, jobs).records


def union_postprocess(records, scales=(1.0,)):
    """
    Ratios of disjoint unions of every pair of records, the second one dilated by each
    factor in `scales`. Returns (id_a, id_b, scale, RatioPoint); each union stays below
    max(y_a, y_b, K2).
    """
    out = []
    records = list(records)
    for i, a in enumerate(records):
        for b in records[i + 1:]:
            for t in scales:
                point = disjoint_union_ratios(np.asarray(a.lams), np.asarray(b.lams) / (t * t))
                if point.y > max(a.y, b.y, k2()) + 1e-12:
                    warnings.warn(f'union of records {a.id} and {b.id} exceeds its components')
                out.append((a.id, b.id, t, point))
    return out
