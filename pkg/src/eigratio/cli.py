"""
Command line entry point.

Usage:
  eigratio solve --domain square.json --k 4 --refine 3
  eigratio scan --plan dumbbell.yaml --out results/ --jobs 4
  eigratio bounds --step 0.001 --out envelope.csv
  eigratio perturb rect-check --c0 0 --c1 0 --c2 1 --fem
  eigratio perturb tangency --a 2 --q 0.3
  eigratio optimize --class dumbbell --init l=1 h=1.4 r1=0.8 r2=0.8
  eigratio plot --results results/records.csv --out ratios.svg

Exit codes: 0 success, 1 usage, 2 input error, 3 numerical failure.
"""
import argparse
import csv
import dataclasses
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from .bounds import BOUND_TAGS, crossovers, envelope_curve
from .eig import solve_domain
from .errors import (DegenerateEigenvalueError, DomainError, GenerationFailedError, GeometryError,
                     InvalidArgumentError, MeshTooCoarseError, NumericalError)
from .fem import export_pencil
from .perturb import quadrilateral_tangency_check, rectangle_cosine_check
from .plot import plot_records
from .scan import (bin_max, class_info, load_plan, optimize_ratio, read_records, run_campaign, summarize,
                   write_bins, write_header, write_records, write_skips, write_summary)
from .serialization import load_domain
from .settings import get_settings, override

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f'{self.prog}: error: {message}')


def _meta(args, **extra):
    """Header fields embedded in every output file."""
    config = {k: v for k, v in vars(args).items() if k not in ('func', 'jobs', 'verbose') and v is not None}
    meta = {'tool': f'eigratio {__version__}', 'subcommand': args.command, 'config': config,
            'settings': dataclasses.asdict(get_settings())}
    meta.update(extra)
    return meta


def _dump(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True, default=float) + '\n'
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)


def cmd_solve(args):
    d = load_domain(args.domain)
    sol = solve_domain(d, level=args.refine, k=args.k, extrapolate=args.extrapolate)
    out = {
        'meta': _meta(args),
        'domain': repr(d),
        'area': d.area,
        'dofs': sol.pencil.n,
        'level': sol.level,
        'values': sol.values.tolist(),
        'residuals': sol.spectrum.residuals.tolist(),
    }
    if sol.spectrum.k >= 3:
        out['x'], out['y'] = sol.spectrum.ratios()
    if sol.spectrum.k >= 4:
        out['delta4'] = sol.spectrum.delta4()
    if args.extrapolate:
        out['extrapolated'] = sol.extrapolated.tolist()
    if args.export:
        export_pencil(sol.pencil, args.export)
    _dump(out, args.out)
    return EXIT_OK


def cmd_scan(args):
    plan = load_plan(args.plan, seed=args.seed)
    changes = {k: v for k, v in (('level', args.level), ('dx', args.dx), ('count', args.count)) if v is not None}
    if args.no_confirm:
        changes['confirm_level'] = 0
    if changes:
        plan = dataclasses.replace(plan, **changes)
    os.makedirs(args.out, exist_ok=True)
    campaign = run_campaign(plan, jobs=args.jobs)
    meta = _meta(args, plan=plan.to_dict(), seed=plan.seed)

    write_records(os.path.join(args.out, 'records.csv'), campaign.records, meta)
    write_skips(os.path.join(args.out, 'skips.csv'), campaign.skips, meta)
    if campaign.flagged:
        write_records(os.path.join(args.out, 'flagged.csv'), campaign.flagged, meta)
    if not campaign.records:
        logger.warning('no record survived the campaign')
        return EXIT_OK
    write_bins(os.path.join(args.out, 'bins.csv'), bin_max(campaign.records, plan.dx), meta)
    summaries = [summarize(campaign.records, plan.class_tag)]

    if args.optimize and class_info(plan.class_tag).get('params'):
        best = summaries[0].argmax
        opt = optimize_ratio(plan.class_tag, best.param_dict, level=plan.level)
        write_records(os.path.join(args.out, 'optimized.csv'), [opt], meta)
        summaries.append(summarize([opt], f'{plan.class_tag} (optimized)'))
    write_summary(os.path.join(args.out, 'summary.csv'), summaries, meta)
    s = summaries[-1]
    print(f'{s.class_tag}: {len(campaign.records)} records, Y* = {s.y_star:.5f}, delta4 = {s.delta4:.2e}')
    return EXIT_OK


def cmd_bounds(args):
    curve = envelope_curve(args.step)
    with open(args.out, 'w', newline='', encoding='utf-8') as f:
        write_header(f, _meta(args))
        w = csv.writer(f, lineterminator='\n')
        w.writerow(['x', 'envelope', 'active'] + list(BOUND_TAGS))
        for n, x in enumerate(curve.grid):
            row = [repr(float(x)), repr(float(curve.envelope[n])), curve.active[n]]
            row += ['' if np.isnan(curve.columns[t][n]) else repr(float(curve.columns[t][n])) for t in BOUND_TAGS]
            w.writerow(row)
    x, y = curve.argmax()
    print(f'max envelope {y:.5f} at x = {x:.5f}')
    for x, before, after in crossovers(curve):
        print(f'  {before} -> {after} at x = {x:.4f}')
    return EXIT_OK


def cmd_perturb(args):
    if args.check == 'rect-check':
        report = rectangle_cosine_check(args.c0, args.c1, args.c2, fem=args.fem, eps=args.eps, level=args.level)
    else:
        report = quadrilateral_tangency_check(args.a, args.p, args.q, args.r, eps=args.eps)
    report['meta'] = _meta(args)
    _dump(report, args.out)
    return EXIT_OK


def _parse_init(pairs):
    init = {}
    for item in pairs:
        name, sep, value = item.partition('=')
        if not sep:
            raise InvalidArgumentError(f'expected name=value, got {item!r}')
        try:
            init[name] = float(value)
        except ValueError:
            raise InvalidArgumentError(f'not a number: {item!r}') from None
    return init


def cmd_optimize(args):
    init = _parse_init(args.init)
    degrees = set(class_info(args.class_tag).get('degrees', ()))
    if args.degrees:
        init = {k: math.radians(v) if k in degrees else v for k, v in init.items()}
    rec = optimize_ratio(args.class_tag, init, level=args.level)
    _dump({'meta': _meta(args), 'params': rec.param_dict, 'values': list(rec.lams), 'x': rec.x, 'y': rec.y,
           'delta4': rec.delta4, 'level': rec.level}, args.out)
    return EXIT_OK


def cmd_plot(args):
    records = read_records(args.results)
    curve = None if args.no_envelope else envelope_curve(args.envelope_step)
    plot_records(args.out, records, curve, title=args.title)
    return EXIT_OK


def build_parser():
    parser = _Parser(prog='eigratio', description='Dirichlet-Laplacian eigenvalue ratios of planar domains.')
    parser.add_argument('--version', action='version', version=f'eigratio {__version__}')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='INFO, or DEBUG when repeated')
    parser.add_argument('--eig-tol', type=float, help='eigenpair residual tolerance')
    parser.add_argument('--arc-segments', type=int, help='chords per full circle')
    sub = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)

    p = sub.add_parser('solve', help='spectrum of one domain')
    p.add_argument('--domain', required=True, help='domain JSON file')
    p.add_argument('--k', type=int, default=4)
    p.add_argument('--refine', type=int, default=3, help='red refinements of the coarse mesh')
    p.add_argument('--extrapolate', action='store_true', help='Richardson extrapolation over the last two levels')
    p.add_argument('--export', metavar='PREFIX', help='write the pencil as PREFIX_K.mtx, PREFIX_M.mtx')
    p.add_argument('--out', help='JSON output file (default stdout)')
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser('scan', help='experiment campaign over a domain class')
    p.add_argument('--plan', required=True, help='YAML or JSON plan file')
    p.add_argument('--out', required=True, help='output directory')
    p.add_argument('--seed', type=int, help='master seed (over SPECTRA_SEED and the plan)')
    p.add_argument('--jobs', type=int, default=1)
    p.add_argument('--level', type=int)
    p.add_argument('--dx', type=float)
    p.add_argument('--count', type=int)
    p.add_argument('--no-confirm', action='store_true', help='skip the finer re-solve near bin maxima')
    p.add_argument('--optimize', action='store_true', help='locally optimise the best record')
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser('bounds', help='envelope of the known upper bounds on lambda3/lambda1')
    p.add_argument('--step', type=float, default=0.001)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser('perturb', help='first-order perturbation checks on rectangles')
    checks = p.add_subparsers(dest='check', required=True, parser_class=_Parser)
    c = checks.add_parser('rect-check', help='cosine family on R_sqrt(8/3)')
    c.add_argument('--c0', type=float, default=0.0)
    c.add_argument('--c1', type=float, default=0.0)
    c.add_argument('--c2', type=float, default=1.0)
    c.add_argument('--fem', action='store_true', help='also difference FEM eigenvalues')
    c.add_argument('--eps', type=float, default=1e-3)
    c.add_argument('--level', type=int, default=3)
    c.add_argument('--out')
    c.set_defaults(func=cmd_perturb)
    c = checks.add_parser('tangency', help='linear field p + q x1 + r x2 on R_a')
    c.add_argument('--a', type=float, required=True)
    c.add_argument('--p', type=float, default=0.0)
    c.add_argument('--q', type=float, default=0.0)
    c.add_argument('--r', type=float, default=0.0)
    c.add_argument('--eps', type=float, default=1e-3)
    c.add_argument('--out')
    c.set_defaults(func=cmd_perturb)

    p = sub.add_parser('optimize', help='local maximisation of lambda3/lambda1 within a class')
    p.add_argument('--class', dest='class_tag', required=True)
    p.add_argument('--init', nargs='+', required=True, metavar='NAME=VALUE')
    p.add_argument('--degrees', action='store_true', help='angles in --init are in degrees')
    p.add_argument('--level', type=int, default=2)
    p.add_argument('--out')
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser('plot', help='SVG scatter of scan results')
    p.add_argument('--results', required=True, help='records CSV written by scan')
    p.add_argument('--out', required=True)
    p.add_argument('--envelope-step', type=float, default=0.005)
    p.add_argument('--no-envelope', action='store_true')
    p.add_argument('--title')
    p.set_defaults(func=cmd_plot)
    return parser


def _stage(e):
    if isinstance(e, GenerationFailedError):
        return 'generation' if e.stage is None else f'generation/{e.stage}'
    if isinstance(e, MeshTooCoarseError):
        return 'mesh'
    return 'eigensolver'


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format='%(asctime)s %(name)s %(levelname)s: %(message)s')
    changes = {}
    if args.eig_tol is not None:
        changes['eig_tol'] = args.eig_tol
    if args.arc_segments is not None:
        changes['arc_segments'] = args.arc_segments
    try:
        with override(**changes):
            return args.func(args)
    except (NumericalError, MeshTooCoarseError, GenerationFailedError) as e:
        print(f'eigratio: numerical failure in {_stage(e)}: {e}', file=sys.stderr)
        return EXIT_NUMERICAL
    except (InvalidArgumentError, GeometryError, DomainError, DegenerateEigenvalueError, OSError) as e:
        print(f'eigratio: {e}', file=sys.stderr)
        return EXIT_INPUT


def main():
    sys.exit(run())
