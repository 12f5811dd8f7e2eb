"""Command-line front end.

Usage::

    python -m lindex maxmod --fn data/specs/poly_z1z2.json --center 0 0 --radii 0.3 0.4
    python -m lindex main-poly --a 1,100 --N 0 --d 1
    python -m lindex example1 --levels 0.5,0.7,0.9 --cap 12

Exit codes: 0 Holds/success, 1 Fails, 2 Inconclusive, 64 usage error,
65 spec-file error. Diagnostics go to stderr as one JSON line.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from contextlib import contextmanager
from typing import Any, Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import pandas as pd

from config.load_config import get_config
from config.versioning import run_lineage
from lindex.coefficients import diagonal_max, expand, normalize, taylor_cauchy, taylor_closed_form
from lindex.criteria import (
    check_hayman, check_kth_max_modulus, check_local_dominance, check_modulus_ratio, check_pure_partials,
    check_tail_dominance, find_main_polynomial, index_bound_from_ratio, verify_main_polynomial,
)
from lindex.domain import BidiscPoint, MultiIndex, PolarGrid, Radii, Verdict
from lindex.errors import DegenerateRadius, DomainViolation, LIndexError, SkeletonOutsideDomain, SpecError
from lindex.families import example1_function, load_function_spec
from lindex.index import default_exhaustion, index_profile, local_index, max_modulus
from lindex.reporting import dumps, payload_frame, summary_line, write_frame, write_json_line
from lindex.weights import example1_weight, lambda_bounds, load_weight_spec, validate_weight

logger = logging.getLogger(__name__)

EXIT_USAGE = 64
EXIT_SPEC = 65
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class UsageError(Exception):
    pass


class Outcome(NamedTuple):
    payloads: List[Dict[str, Any]]
    exit_code: int
    frame: Optional[pd.DataFrame] = None
    verdicts: Tuple[Verdict, ...] = ()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --- argument types ---------------------------------------------------------

def _grid_arg(text: str) -> Tuple[int, int]:
    try:
        n, m = (int(x) for x in text.lower().split('x'))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like NxM, got {text!r}")
    if n < 1 or m < 1:
        raise argparse.ArgumentTypeError(f"grid counts must be >= 1, got {text!r}")
    return n, m


def _count(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text!r}")
    return value


def _positive(text: str) -> int:
    value = _count(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text!r}")
    return value


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _point(values: Sequence[float]) -> BidiscPoint:
    if len(values) == 2:
        return BidiscPoint(complex(values[0]), complex(values[1]))
    if len(values) == 4:
        return BidiscPoint(complex(values[0], values[1]), complex(values[2], values[3]))
    raise UsageError(f"--center takes 2 real or 4 (re im re im) numbers, got {len(values)}")


def _radii(values: Optional[Sequence[float]], flag: str = '--radii') -> Radii:
    if values is None:
        raise UsageError(f"{flag} is required")
    return Radii(values[0], values[1])


def _centers(args) -> List[BidiscPoint]:
    if not args.center:
        raise UsageError("--center is required")
    return [_point(c) for c in args.center]


def _targets(args) -> list:
    """One target per --center, or a single polar grid of radius --max-radius."""
    if args.center:
        return [_point(c) for c in args.center]
    n_r, n_t = args.grid or tuple(get_config()['polydisc_grid'])
    return [PolarGrid(n_r, n_t, args.max_radius)]


def _function(args):
    if not args.fn:
        raise UsageError("--fn is required")
    return load_function_spec(args.fn)


def _weight(args):
    if not args.weight:
        raise UsageError("--weight is required")
    return load_weight_spec(args.weight)


def _verdict_exit(verdicts: Iterable[Verdict]) -> int:
    verdicts = list(verdicts)
    if Verdict.FAILS in verdicts:
        return Verdict.FAILS.exit_code
    if Verdict.INCONCLUSIVE in verdicts:
        return Verdict.INCONCLUSIVE.exit_code
    return 0


def _reports(reports) -> Outcome:
    verdicts = tuple(r.verdict for r in reports)
    return Outcome([r.to_dict() for r in reports], _verdict_exit(verdicts), verdicts=verdicts)


# --- commands ---------------------------------------------------------------

def cmd_validate_weight(args) -> Outcome:
    L = _weight(args)
    n_r, n_t = args.grid or tuple(get_config()['outer_grid'])
    report = validate_weight(L, PolarGrid(n_r, n_t, args.max_radius or get_config()['outer_max_radius']))
    return Outcome([report.to_dict()], 0 if report.admissible else Verdict.FAILS.exit_code)


def cmd_lambda(args) -> Outcome:
    L = _weight(args)
    est = lambda_bounds(L, _radii(args.radii), inner_grid=args.grid, refine_check=args.refine)
    return Outcome([est.to_dict()], 0 if est.q2_consistent else Verdict.INCONCLUSIVE.exit_code)


def cmd_coeffs(args) -> Outcome:
    F = _function(args)
    z0 = _centers(args)[0]
    order = args.order if args.order is not None else int(get_config()['default_cap'])
    if args.method == 'exact':
        table = taylor_closed_form(F, z0, order)
    elif args.method == 'cauchy':
        rho = Radii(*args.rho) if args.rho else None
        table = taylor_cauchy(F, z0, rho=rho, n_samples=args.samples, order=order)
    else:
        table = expand(F, z0, order)
    frame = table.to_frame()
    payload = {
        'function': F.describe(), 'center': z0.to_dict(), 'order': order, 'method': table.method,
        'tail_indicator': table.tail_indicator,
        'extraction_radii': table.extraction_radii.to_dict() if table.extraction_radii else None,
        'coefficients': frame.values.tolist(),
    }
    return Outcome([payload], 0, frame=frame)


def cmd_local_index(args) -> Outcome:
    F, L = _function(args), _weight(args)
    results = [local_index(F, L, z0, cap=args.cap, tol=args.tol, strict=args.strict) for z0 in _centers(args)]
    verdicts = tuple(r.status for r in results)
    return Outcome([r.to_dict() for r in results], _verdict_exit(verdicts), verdicts=verdicts)


def _profile_outcome(profile, extra: Dict[str, Any]) -> Outcome:
    payload = {**extra, **profile.to_dict()}
    code = 0 if profile.sup is not None else Verdict.INCONCLUSIVE.exit_code
    return Outcome([payload], code, frame=profile.to_frame())


def cmd_index_profile(args) -> Outcome:
    F, L = _function(args), _weight(args)
    grids = default_exhaustion(args.levels, args.grid)
    profile = index_profile(F, L, grids, cap=args.cap, tol=args.tol, max_workers=args.workers)
    return _profile_outcome(profile, {'function': F.describe(), 'weight': L.describe()})


def cmd_maxmod(args) -> Outcome:
    F = _function(args)
    results = [max_modulus(F, z0, _radii(args.radii), args.samples) for z0 in _centers(args)]
    return Outcome([r.to_dict() for r in results], 0)


def cmd_ratio(args) -> Outcome:
    F, L = _function(args), _weight(args)
    Rp, Rs = _radii(args.rprime, '--rprime'), _radii(args.rsecond, '--rsecond')
    reports = [check_modulus_ratio(F, L, t, Rp, Rs, args.samples, max_workers=args.workers) for t in _targets(args)]
    outcome = _reports(reports)
    if min(Rs.r1, Rs.r2) > 1.0 and max(Rp.r1, Rp.r2) < 1.0:
        for payload, report in zip(outcome.payloads, reports):
            if report.verdict is Verdict.HOLDS:
                bound = index_bound_from_ratio(Rp, Rs, max(1.0, report.witness['p1']))
                payload['witness']['index_bound'] = bound
                payload['witness']['index_bound_floor'] = math.floor(bound)
    return outcome


def cmd_hayman(args) -> Outcome:
    F, L = _function(args), _weight(args)
    return _reports([check_hayman(F, L, t, args.p, N=args.N, max_workers=args.workers) for t in _targets(args)])


def cmd_tail(args) -> Outcome:
    F, L = _function(args), _weight(args)
    return _reports([check_tail_dominance(F, L, t, args.N, args.c, cap=args.cap, max_workers=args.workers)
                     for t in _targets(args)])


def cmd_local_dominance(args) -> Outcome:
    F, L = _function(args), _weight(args)
    R = _radii(args.radii)
    return _reports([check_local_dominance(F, L, z0, R, args.n0, args.grid, tol=args.tol)
                     for z0 in _centers(args)])


def cmd_kth_modulus(args) -> Outcome:
    F = _function(args)
    R = _radii(args.radii)
    k0 = MultiIndex(*args.k0)
    return _reports([check_kth_max_modulus(F, z0, R, k0, args.grid) for z0 in _centers(args)])


def cmd_pure_partials(args) -> Outcome:
    F = _function(args)
    R = _radii(args.radii)
    return _reports([check_pure_partials(F, z0, R, args.k10, args.k20, args.grid) for z0 in _centers(args)])


def cmd_main_poly(args) -> Outcome:
    beta = float(get_config()['default_beta'])
    if args.a is not None:
        result = find_main_polynomial(args.a, args.N, args.d, n0=args.n0, beta=beta)
    else:
        F, L = _function(args), _weight(args)
        z0 = _centers(args)[0]
        cap = args.cap if args.cap is not None else int(get_config()['default_cap'])
        a = diagonal_max(normalize(expand(F, z0, cap), L))
        result = find_main_polynomial(a, args.N, args.d, n0=args.n0, log_domain=True, beta=L.beta)
    return Outcome([result.to_dict()], 0)


def cmd_verify_main_poly(args) -> Outcome:
    F, L = _function(args), _weight(args)
    R = _radii(args.radii)
    order = args.order if args.order is not None else int(get_config()['default_cap'])
    reports = [verify_main_polynomial(expand(F, z0, order), L, z0, R, args.k0, args.samples)
               for z0 in _centers(args)]
    return _reports(reports)


def cmd_example1(args) -> Outcome:
    """exp(1/((1-z1)(1-z2))) with the boundary-power weight rescaled by 2*beta."""
    F = example1_function()
    L = example1_weight(beta=args.beta, rescale=not args.no_rescale)
    grids = default_exhaustion(args.levels, args.grid)
    profile = index_profile(F, L, grids, cap=args.cap, tol=args.tol, max_workers=args.workers)
    conclusive = [r for _, r in profile.per_point if r.conclusive]
    zero_fraction = sum(r.n0 == 0 for r in conclusive) / len(profile.per_point) if profile.per_point else 0.0
    outcome = _profile_outcome(profile, {'function': F.describe(), 'weight': L.describe(),
                                         'zero_fraction': zero_fraction})
    if profile.sup is not None and profile.sup > 0:
        return outcome._replace(exit_code=Verdict.FAILS.exit_code)
    return outcome


# --- parser -----------------------------------------------------------------

def _add_io(p: argparse.ArgumentParser) -> None:
    p.add_argument('--out', default=None, help='Output file (default: stdout)')
    p.add_argument('--format', choices=['json', 'csv'], default='json', help='Report format (default: json)')
    p.add_argument('--workers', type=_positive, default=None, help='Worker threads (capped by BINDEX_THREADS)')


def _add_fn(p, weight: bool = True) -> None:
    p.add_argument('--fn', help='Function spec JSON')
    if weight:
        p.add_argument('--weight', help='Weight spec JSON')


def _add_center(p) -> None:
    p.add_argument('--center', nargs='+', type=float, action='append',
                   help='RE RE or RE IM RE IM; repeat for batch runs')


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='lindex', description="L-index in joint variables on the unit bidisc.")
    parser.add_argument('-v', '--verbose', action='store_true', help='Log INFO to stderr')
    parser.add_argument('--log-file', default=None, help='Timestamped sidecar log')
    sub = parser.add_subparsers(dest='command', required=True)

    def add(name: str, fn: Callable, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        _add_io(p)
        p.set_defaults(handler=fn)
        return p

    p = add('validate-weight', cmd_validate_weight, 'Admissibility of a weight on a polar grid')
    p.add_argument('--weight', help='Weight spec JSON')
    p.add_argument('--grid', type=_grid_arg, default=None)
    p.add_argument('--max-radius', type=float, default=None)

    p = add('lambda', cmd_lambda, 'Sampled lambda_{1,j}(R), lambda_{2,j}(R)')
    p.add_argument('--weight', help='Weight spec JSON')
    p.add_argument('--radii', nargs=2, type=float)
    p.add_argument('--grid', type=_grid_arg, default=None, help='Inner polydisc grid')
    p.add_argument('--refine', action='store_true', help='Refine once and report the change')

    p = add('coeffs', cmd_coeffs, 'Taylor coefficient table at a point')
    _add_fn(p, weight=False)
    _add_center(p)
    p.add_argument('--order', type=_count, default=None)
    p.add_argument('--method', choices=['auto', 'exact', 'cauchy'], default='auto')
    p.add_argument('--rho', nargs=2, type=float, default=None)
    p.add_argument('--samples', type=_positive, default=None)

    p = add('local-index', cmd_local_index, 'Local L-index at points')
    _add_fn(p)
    _add_center(p)
    p.add_argument('--cap', type=_positive, default=None)
    p.add_argument('--tol', type=float, default=None)
    p.add_argument('--strict', action='store_true', help='Raise on unsound truncation')

    for name, fn, help_text in (('index-profile', cmd_index_profile, 'Index profile over exhaustion grids'),
                                ('example1', cmd_example1, 'Canned exp(1/((1-z1)(1-z2))) profile')):
        p = add(name, fn, help_text)
        if name == 'index-profile':
            _add_fn(p)
        else:
            p.add_argument('--beta', type=float, default=2.0)
            p.add_argument('--no-rescale', action='store_true')
        p.add_argument('--levels', type=_float_list, default=None)
        p.add_argument('--grid', type=_grid_arg, default=None)
        p.add_argument('--cap', type=_positive, default=None)
        p.add_argument('--tol', type=float, default=None)

    p = add('maxmod', cmd_maxmod, 'Max modulus on a skeleton')
    _add_fn(p, weight=False)
    _add_center(p)
    p.add_argument('--radii', nargs=2, type=float)
    p.add_argument('--samples', type=_positive, default=None)

    for name, fn, help_text in (('ratio', cmd_ratio, 'Max-modulus ratio criterion'),
                                ('hayman', cmd_hayman, 'Hayman-type derivative criterion'),
                                ('tail', cmd_tail, 'Series tail dominance criterion')):
        p = add(name, fn, help_text)
        _add_fn(p)
        _add_center(p)
        p.add_argument('--grid', type=_grid_arg, default=None, help='Polar grid when no --center')
        p.add_argument('--max-radius', type=float, default=0.5)
        if name == 'ratio':
            p.add_argument('--rprime', nargs=2, type=float)
            p.add_argument('--rsecond', nargs=2, type=float)
            p.add_argument('--samples', type=_positive, default=None)
        elif name == 'hayman':
            p.add_argument('--p', type=_count, required=True)
            p.add_argument('--N', type=_count, default=None)
        else:
            p.add_argument('--N', type=_count, required=True)
            p.add_argument('--c', type=float, required=True)
            p.add_argument('--cap', type=_positive, default=None)

    p = add('local-dominance', cmd_local_dominance, 'Derivative dominance on a polydisc')
    _add_fn(p)
    _add_center(p)
    p.add_argument('--radii', nargs=2, type=float)
    p.add_argument('--n0', type=_count, required=True)
    p.add_argument('--grid', type=_grid_arg, default=None)
    p.add_argument('--tol', type=float, default=None)

    p = add('kth-modulus', cmd_kth_modulus, 'Max modulus of one derivative on a polydisc')
    _add_fn(p, weight=False)
    _add_center(p)
    p.add_argument('--radii', nargs=2, type=float, help='Polydisc radii R/L(z0)')
    p.add_argument('--k0', nargs=2, type=_count, required=True)
    p.add_argument('--grid', type=_grid_arg, default=None)

    p = add('pure-partials', cmd_pure_partials, 'Max modulus of both pure partials')
    _add_fn(p, weight=False)
    _add_center(p)
    p.add_argument('--radii', nargs=2, type=float, help='Polydisc radii R/L(z0)')
    p.add_argument('--k10', type=_count, required=True)
    p.add_argument('--k20', type=_count, required=True)
    p.add_argument('--grid', type=_grid_arg, default=None)

    p = add('main-poly', cmd_main_poly, 'Main-polynomial radius search')
    p.add_argument('--a', type=_float_list, default=None, help='Diagonal sequence a_0,a_1,...')
    _add_fn(p)
    _add_center(p)
    p.add_argument('--cap', type=_positive, default=None)
    p.add_argument('--N', type=_count, required=True)
    p.add_argument('--d', type=float, default=1.0)
    p.add_argument('--n0', type=_count, default=None)

    p = add('verify-main-poly', cmd_verify_main_poly, 'Check a main polynomial on a skeleton')
    _add_fn(p)
    _add_center(p)
    p.add_argument('--radii', nargs=2, type=float)
    p.add_argument('--k0', type=_count, required=True)
    p.add_argument('--order', type=_count, default=None)
    p.add_argument('--samples', type=_positive, default=None)

    return parser


# --- entry point --------------------------------------------------------------

def setup_logging(verbose: bool = False, log_file: Optional[str] = None) -> None:
    stderr = logging.StreamHandler(sys.stderr)
    stderr.setLevel(logging.INFO if verbose else logging.WARNING)
    stderr.setFormatter(logging.Formatter('%(name)s - %(levelname)s - %(message)s'))
    handlers: List[logging.Handler] = [stderr]
    if log_file:
        sidecar = logging.FileHandler(log_file)
        sidecar.setLevel(logging.DEBUG)
        sidecar.setFormatter(logging.Formatter(LOG_FORMAT))
        handlers.append(sidecar)
    logging.basicConfig(level=logging.DEBUG if log_file else stderr.level, handlers=handlers, force=True)
    if log_file:
        logger.info(f"run {json.dumps(run_lineage())}")


def _diagnose(error: BaseException, code: int) -> int:
    sys.stderr.write(dumps({'error': type(error).__name__, 'message': str(error), 'exit_code': code}) + '\n')
    return code


@contextmanager
def _output(path: Optional[str]):
    if path:
        with open(path, 'w', newline='') as f:
            yield f
    else:
        yield sys.stdout


def emit(outcome: Outcome, fmt: str, path: Optional[str]) -> None:
    with _output(path) as stream:
        if fmt == 'csv':
            write_frame(outcome.frame if outcome.frame is not None else payload_frame(outcome.payloads), stream)
            return
        for payload in outcome.payloads:
            write_json_line(payload, stream)
        if len(outcome.payloads) > 1:
            write_json_line(summary_line(outcome.verdicts), stream)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        return _diagnose(e, EXIT_USAGE)
    setup_logging(args.verbose, args.log_file)
    logger.info(f"command {args.command}")
    try:
        outcome = args.handler(args)
    except SpecError as e:
        return _diagnose(e, EXIT_SPEC)
    except (UsageError, DomainViolation, DegenerateRadius, SkeletonOutsideDomain) as e:
        return _diagnose(e, EXIT_USAGE)
    except LIndexError as e:
        return _diagnose(e, Verdict.INCONCLUSIVE.exit_code)
    except ValueError as e:
        return _diagnose(e, EXIT_USAGE)
    emit(outcome, args.format, args.out)
    return outcome.exit_code


__all__ = ['main', 'build_parser', 'emit', 'setup_logging', 'Outcome', 'UsageError', 'EXIT_USAGE', 'EXIT_SPEC']
