"""Boundedness criteria for the L-index and the main-polynomial search.

Each checker samples a finite set of points, computes the quantity its
criterion bounds and returns a CriterionReport whose witness carries the
measured constant. Ratios are formed in log-domain, so the reported
witnesses do not change when F is multiplied by a nonzero constant.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.special import gammaln, logsumexp

from config.load_config import get_config, resolve_max_workers
from lindex.bounds import main_poly_log_c, main_polynomial_window
from lindex.coefficients import CoeffTable, default_extraction_radii, expand, normalize
from lindex.domain import (
    LOG_ZERO, AnalyticFunction, BidiscPoint, CriterionReport, LogMagnitude, MultiIndex, PointGrid,
    Radii, TheoremId, Verdict, degree_enumerate, inside_bidisc, log_abs_array, polydisc_samples,
    total_degree,
)
from lindex.errors import DomainViolation, IterationOverrun, NoNonzeroCoefficient, SkeletonOutsideDomain
from lindex.index import check_skeleton, max_modulus

logger = logging.getLogger(__name__)

Samples = Optional[Tuple[int, int]]


def _slack() -> float:
    return float(get_config()['verdict_slack'])


def _polydisc_grid(samples: Samples) -> Tuple[int, int]:
    n_r, n_t = samples or get_config()['polydisc_grid']
    return int(n_r), int(n_t)


def _as_grid(z0_grid):
    if isinstance(z0_grid, BidiscPoint):
        return PointGrid.single(z0_grid)
    return z0_grid


def _map_points(fn: Callable, grid, max_workers: Optional[int]) -> List[Tuple[BidiscPoint, Any]]:
    points = list(_as_grid(grid).iter_points())
    with ThreadPoolExecutor(max_workers=resolve_max_workers(max_workers)) as pool:
        return list(zip(points, pool.map(fn, points)))


def _log_sum(values: np.ndarray) -> float:
    finite = values[np.isfinite(values)]
    return float(logsumexp(finite)) if finite.size else LOG_ZERO


def _value(log_x: float) -> float:
    return LogMagnitude(log_x).value


def _polydisc_points(z0: BidiscPoint, radii: Radii, samples: Samples) -> List[BidiscPoint]:
    n_r, n_t = _polydisc_grid(samples)
    z1, z2 = polydisc_samples(z0, radii, n_r, n_t)
    if not inside_bidisc(z1, z2).all():
        raise SkeletonOutsideDomain(
            f"Polydisc around ({z0.z1}, {z0.z2}) with radii ({radii.r1}, {radii.r2}) leaves the bidisc")
    return [BidiscPoint(a, b) for a, b in zip(z1, z2)]


def _sampling(radii: Radii, samples: Samples, n_points: int, F: AnalyticFunction) -> Dict[str, Any]:
    n_r, n_t = _polydisc_grid(samples)
    return {'polydisc_radii': radii.to_dict(), 'n_radial': n_r, 'n_angular': n_t, 'points': n_points,
            'derivatives': 'exact' if F.has_exact_derivatives else 'cauchy'}


# --- derivative dominance on a polydisc --------------------------------------

def dominance_extraction_radii(z: BidiscPoint, radii: Radii) -> Radii:
    """Cauchy radius at a sampled point z: the default radius, capped by the polydisc radii."""
    rho = default_extraction_radii(z)
    return Radii(min(rho.r1, radii.r1), min(rho.r2, radii.r2))


def check_local_dominance(F: AnalyticFunction, L, z0: BidiscPoint, R: Radii, n0: int,
                          samples: Samples = None, tol: Optional[float] = None) -> CriterionReport:
    """Find K0 with ||K0|| <= n0 and the least p0 such that every a*_K(z), ||K|| <= n0,
    over the closed polydisc D[z0, R/L(z0)] is at most p0 a*_K0(z0).

    Candidates whose p0 is within a factor (1 + tol) of the least one tie; the
    first of them in degree order is reported.
    """
    if n0 < 0:
        raise DomainViolation(f"n0 must be >= 0, got {n0}")
    tol = float(tol if tol is not None else get_config()['index_tol'])
    if tol < 0:
        raise DomainViolation(f"tol must be >= 0, got {tol}")
    radii = R.over(*L.at(z0))
    points = _polydisc_points(z0, radii, samples)

    def at(p: BidiscPoint) -> CoeffTable:
        if F.has_exact_derivatives:
            return expand(F, p, n0)
        return expand(F, p, n0, rho=dominance_extraction_radii(p, radii))

    lhs, worst = LOG_ZERO, z0
    for p in points:
        m = float(normalize(at(p), L).log_values.max())
        if m > lhs:
            lhs, worst = m, p
    center = normalize(at(z0), L).log_values
    sampling = _sampling(radii, samples, len(points), F)

    candidates = [(lhs - float(center[K]), K) for K in degree_enumerate(n0) if center[K] > LOG_ZERO]
    if not candidates:
        return CriterionReport(TheoremId.LOCAL_DOMINANCE, Verdict.FAILS,
                               witness={'lhs': _value(lhs), 'n0': n0}, sampling=sampling, worst_point=z0,
                               reason="AllDerivativesVanish: every derivative of order <= n0 is zero at z0")
    least = min(c[0] for c in candidates)
    log_p0, k0 = next(c for c in candidates if c[0] <= least + math.log1p(tol))
    return CriterionReport(
        TheoremId.LOCAL_DOMINANCE, Verdict.HOLDS,
        witness={'k0': k0.to_list(), 'p0': _value(log_p0), 'log_p0': log_p0, 'lhs': _value(lhs), 'n0': n0},
        sampling=sampling, worst_point=worst)


def _derivative_ratio(F: AnalyticFunction, z0: BidiscPoint, radii: Radii, k0: MultiIndex,
                      samples: Samples) -> Tuple[float, BidiscPoint, int]:
    """log of max |F^(k0)(z)| / |F^(k0)(z0)| over the sampled polydisc (factorials cancel)."""
    order = k0.order
    center = float(expand(F, z0, order).log_abs[k0.k1, k0.k2])
    if center == LOG_ZERO:
        return math.nan, z0, 0
    points = _polydisc_points(z0, radii, samples)
    best, worst = LOG_ZERO, z0
    for p in points:
        v = float(expand(F, p, order).log_abs[k0.k1, k0.k2])
        if v > best:
            best, worst = v, p
    return best - center, worst, len(points)


def check_kth_max_modulus(F: AnalyticFunction, z0: BidiscPoint, R_over_L: Radii, k0: MultiIndex,
                          samples: Samples = None) -> CriterionReport:
    k0 = MultiIndex(*k0)
    log_p, worst, n = _derivative_ratio(F, z0, R_over_L, k0, samples)
    sampling = _sampling(R_over_L, samples, n, F)
    if math.isnan(log_p):
        return CriterionReport(TheoremId.KTH_MAX_MODULUS, Verdict.FAILS, witness={'k0': k0.to_list()},
                               sampling=sampling, worst_point=z0,
                               reason=f"CenterDerivativeZero: F^{tuple(k0)}(z0) = 0")
    return CriterionReport(TheoremId.KTH_MAX_MODULUS, Verdict.HOLDS,
                           witness={'k0': k0.to_list(), 'p': _value(log_p), 'log_p': log_p},
                           sampling=sampling, worst_point=worst)


def check_pure_partials(F: AnalyticFunction, z0: BidiscPoint, R_over_L: Radii, k10: int, k20: int,
                        samples: Samples = None) -> CriterionReport:
    """Both pure partials F^(k10, 0) and F^(0, k20) must satisfy the max-modulus bound with one p."""
    first = check_kth_max_modulus(F, z0, R_over_L, MultiIndex(k10, 0), samples)
    second = check_kth_max_modulus(F, z0, R_over_L, MultiIndex(0, k20), samples)
    witness: Dict[str, Any] = {'k10': k10, 'k20': k20,
                               'p_first': first.witness.get('p'), 'p_second': second.witness.get('p')}
    for report in (first, second):
        if report.verdict is Verdict.FAILS:
            return CriterionReport(TheoremId.PURE_PARTIALS, Verdict.FAILS, witness=witness,
                                   sampling=first.sampling, worst_point=z0, reason=report.reason)
    log_p = max(first.witness['log_p'], second.witness['log_p'])
    worst = first.worst_point if first.witness['log_p'] >= second.witness['log_p'] else second.worst_point
    witness.update(p=_value(log_p), log_p=log_p)
    return CriterionReport(TheoremId.PURE_PARTIALS, Verdict.HOLDS, witness=witness,
                           sampling=first.sampling, worst_point=worst)


# --- max-modulus ratio ---------------------------------------------------------

def check_modulus_ratio(F: AnalyticFunction, L, z0_grid, Rprime: Radii, Rsecond: Radii,
                        samples: Optional[int] = None, max_workers: Optional[int] = None) -> CriterionReport:
    """p1 = max over the grid of M(R''/L(z0), z0) / M(R'/L(z0), z0)."""
    if not (Rprime.r1 < Rsecond.r1 and Rprime.r2 < Rsecond.r2):
        raise DomainViolation(f"Need R' < R'' componentwise, got {Rprime.to_dict()} / {Rsecond.to_dict()}")
    Rsecond.require_q2(L.beta)
    n = int(samples or get_config()['skeleton_samples'])
    grid = _as_grid(z0_grid)
    for p in grid.iter_points():
        check_skeleton(p, Rsecond.over(*L.at(p)))

    def ratio(p: BidiscPoint) -> Tuple[float, float]:
        l1, l2 = L.at(p)
        inner = max_modulus(F, p, Rprime.over(l1, l2), n).log_m.log_abs
        outer = max_modulus(F, p, Rsecond.over(l1, l2), n).log_m.log_abs
        return inner, outer

    results = _map_points(ratio, grid, max_workers)
    sampling = {'grid': grid.describe(), 'skeleton_samples': n,
                'Rprime': Rprime.to_dict(), 'Rsecond': Rsecond.to_dict()}
    for p, (inner, _) in results:
        if inner == LOG_ZERO:
            return CriterionReport(TheoremId.MODULUS_RATIO, Verdict.FAILS, sampling=sampling, worst_point=p,
                                   reason="InnerMaxZero: M(R'/L(z0)) = 0")
    worst, (inner, outer) = max(results, key=lambda r: r[1][1] - r[1][0])
    log_p1 = outer - inner
    logger.debug(f"modulus ratio over {len(results)} points: log p1 = {log_p1:.6g}")
    return CriterionReport(TheoremId.MODULUS_RATIO, Verdict.HOLDS,
                           witness={'p1': _value(log_p1), 'log_p1': log_p1},
                           sampling=sampling, worst_point=worst)


def index_bound_from_ratio(Rprime: Radii, Rsecond: Radii, p1: float) -> float:
    """(-sum_j ln(1 - r'_j) + ln p1) / ln min(r''_1, r''_2); floor it to bound the index."""
    if min(Rsecond.r1, Rsecond.r2) <= 1.0:
        raise DomainViolation(f"R'' must exceed 1 componentwise, got {Rsecond.to_dict()}")
    if not (Rprime.r1 < 1.0 and Rprime.r2 < 1.0):
        raise DomainViolation(f"R' must lie in (0, 1) componentwise, got {Rprime.to_dict()}")
    if p1 < 1.0:
        raise DomainViolation(f"p1 must be >= 1, got {p1}")
    denom = math.log(min(Rsecond.r1, Rsecond.r2))
    return (-math.log1p(-Rprime.r1) - math.log1p(-Rprime.r2) + math.log(p1)) / denom


# --- derivative-ratio criteria -----------------------------------------------

def _log_derivatives(F: AnalyticFunction, L, p: BidiscPoint, order: int) -> np.ndarray:
    """log |F^(K)(p)| / l^K(p), no factorial division."""
    j = np.arange(order + 1)
    return normalize(expand(F, p, order), L).log_values + gammaln(j + 1)[:, None] + gammaln(j + 1)[None, :]


def check_hayman(F: AnalyticFunction, L, z0_grid, p: int, N: Optional[int] = None,
                 max_workers: Optional[int] = None) -> CriterionReport:
    """c_min = max over the grid of max_{||J||=p+1} |F^(J)|/l^J over max_{||K||<=p} |F^(K)|/l^K."""
    if p < 0:
        raise DomainViolation(f"p must be >= 0, got {p}")
    grid = _as_grid(z0_grid)
    deg = total_degree(p + 1)

    def ratio(pt: BidiscPoint) -> Tuple[float, float]:
        v = _log_derivatives(F, L, pt, p + 1)
        return float(v[deg == p + 1].max()), float(v[deg <= p].max())

    results = _map_points(ratio, grid, max_workers)
    sampling = {'grid': grid.describe(), 'p': p}
    for pt, (num, den) in results:
        if den == LOG_ZERO:
            return CriterionReport(TheoremId.HAYMAN, Verdict.FAILS, witness={'p': p}, sampling=sampling,
                                   worst_point=pt, reason="DenominatorZero: F and its derivatives to order p vanish")
    worst, (num, den) = max(results, key=lambda r: r[1][0] - r[1][1])
    log_c = num - den
    witness: Dict[str, Any] = {'p': p, 'c_min': _value(log_c), 'log_c_min': log_c}
    if N is not None:
        log_bound = 2.0 * float(gammaln(N + 2))
        witness['N'] = N
        witness['factorial_bound'] = _value(log_bound)
        witness['within_factorial_bound'] = bool(log_c <= log_bound + math.log1p(_slack()))
    return CriterionReport(TheoremId.HAYMAN, Verdict.HOLDS, witness=witness, sampling=sampling, worst_point=worst)


def check_tail_dominance(F: AnalyticFunction, L, z0_grid, N: int, c: float, cap: Optional[int] = None,
                         max_workers: Optional[int] = None) -> CriterionReport:
    """head = sum_{||K||<=N} a*_K must dominate c * sum_{N<||K||<=cap} a*_K at every point."""
    cfg = get_config()
    cap = int(cap if cap is not None else cfg['default_cap'])
    if cap <= N:
        raise DomainViolation(f"cap must exceed N, got cap={cap}, N={N}")
    if not c > 0:
        raise DomainViolation(f"c must be positive, got {c}")
    grid = _as_grid(z0_grid)
    deg = total_degree(cap)
    band_fraction = float(cfg['tail_band_fraction'])
    log_slack = math.log1p(_slack())

    def sums(pt: BidiscPoint) -> Tuple[float, float, float]:
        v = normalize(expand(F, pt, cap), L).log_values
        return _log_sum(v[deg <= N]), _log_sum(v[(deg > N) & (deg <= cap)]), _log_sum(v[deg == cap])

    results = _map_points(sums, grid, max_workers)
    failing, truncated, ratios = [], [], []
    for pt, (head, tail, top) in results:
        if tail == LOG_ZERO:
            ratios.append((math.inf, pt))
            continue
        ratios.append((head - tail, pt))
        if top > LOG_ZERO and math.exp(top - tail) > band_fraction:
            truncated.append(pt)
        if head < math.log(c) + tail - log_slack:
            failing.append(pt)

    log_ratio, worst = min(ratios, key=lambda r: r[0])
    witness = {'N': N, 'c': c, 'cap': cap,
               'head_tail_ratio': _value(log_ratio),
               'failing_points': len(failing), 'truncated_points': len(truncated)}
    sampling = {'grid': grid.describe()}
    if failing:
        return CriterionReport(TheoremId.TAIL_DOMINANCE, Verdict.FAILS, witness=witness, sampling=sampling,
                               worst_point=worst, reason=f"head < c * tail at {len(failing)} point(s)")
    if truncated:
        return CriterionReport(TheoremId.TAIL_DOMINANCE, Verdict.INCONCLUSIVE, witness=witness, sampling=sampling,
                               worst_point=truncated[0],
                               reason=f"TruncationUnsound: top band exceeds {band_fraction:.0%} of the tail")
    return CriterionReport(TheoremId.TAIL_DOMINANCE, Verdict.HOLDS, witness=witness, sampling=sampling,
                           worst_point=worst)


# --- main polynomial ---------------------------------------------------------

@dataclass(frozen=True)
class MainPolyStep:
    """One iteration: log r_m, log mu_m, s_m, log mu*_m, s*_m (None when no other candidate)."""
    m: int
    r_log: float
    mu_log: float
    s: int
    mu_star_log: float
    s_star: Optional[int]

    def to_dict(self) -> Dict[str, Any]:
        return {'m': self.m, 'r_log': self.r_log, 'mu_log': self.mu_log, 's': self.s,
                'mu_star_log': self.mu_star_log if self.mu_star_log > LOG_ZERO else None, 's_star': self.s_star}


@dataclass(frozen=True)
class MainPolySearchResult:
    N: int
    c_log: LogMagnitude
    d: float
    eta_log: LogMagnitude
    m0: int
    r_log: LogMagnitude
    k0: int
    scan_length: int
    n0_substituted: bool
    trace: List[MainPolyStep] = field(default_factory=list)

    @property
    def within_window(self) -> bool:
        return self.m0 <= 2 * self.N + 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            'N': self.N, 'c': self.c_log.to_dict(), 'd': self.d, 'eta': self.eta_log.to_dict(),
            'm0': self.m0, 'r': self.r_log.to_dict(), 'k0': self.k0, 'scan_length': self.scan_length,
            'n0_substituted': self.n0_substituted, 'within_window': self.within_window,
            'trace': [s.to_dict() for s in self.trace],
        }


def find_main_polynomial(a: Sequence[float], N: int, d: float, n0: Optional[int] = None,
                         log_domain: bool = False, beta: Optional[float] = None) -> MainPolySearchResult:
    """Shrink r_m = d / ((d+1) c^m) until one degree dominates every other by the factor c.

    Args:
        a: diagonal maxima a_k (or their logs with ``log_domain``), e.g. from ``diagonal_max``.
        N: index bound assumed at the point.
        d: outer radius in (0, beta].
        n0: candidate cap at m = 0; without it the whole sequence is scanned and the
            substitution is recorded in the result.
    """
    log_a = np.asarray(a, dtype=float) if log_domain else log_abs_array(np.asarray(a, dtype=float))
    if log_a.size == 0 or not np.isfinite(log_a).any():
        raise NoNonzeroCoefficient("The diagonal sequence has no nonzero entry")
    if not d > 0:
        raise DomainViolation(f"d must be positive, got {d}")
    if beta is not None and d > beta:
        raise DomainViolation(f"d must not exceed beta = {beta}, got {d}")
    if N < 0:
        raise DomainViolation(f"N must be >= 0, got {N}")

    log_c = main_poly_log_c(N)
    eta_log, _ = main_polynomial_window(N, d)
    limit = int(get_config()['iteration_overrun_factor']) * (2 * N + 2)
    hi = len(log_a) - 1 if n0 is None else min(int(n0), len(log_a) - 1)
    base = math.log(d) - math.log(d + 1.0)
    trace: List[MainPolyStep] = []

    m = 0
    while True:
        if m > limit:
            raise IterationOverrun(f"No main polynomial after {limit} iterations (N={N}, d={d})")
        r_log = base - m * log_c
        terms = log_a[:hi + 1] + np.arange(hi + 1) * r_log
        s = int(np.argmax(terms))
        mu = float(terms[s])
        if mu == LOG_ZERO:
            raise NoNonzeroCoefficient(f"a_k vanishes for every k <= {hi}")
        others = np.where(np.arange(hi + 1) == s, LOG_ZERO, terms)
        s_star = int(np.argmax(others)) if others.max() > LOG_ZERO else None
        mu_star = float(others.max())
        trace.append(MainPolyStep(m, r_log, mu, s, mu_star, s_star))
        logger.debug(f"m={m}: log r={r_log:.6g}, s={s}, log mu={mu:.6g}, log mu*={mu_star:.6g}")
        if mu_star <= mu - log_c:
            break
        hi = s
        m += 1

    result = MainPolySearchResult(
        N=N, c_log=LogMagnitude(log_c), d=float(d), eta_log=eta_log, m0=m, r_log=LogMagnitude(r_log),
        k0=s, scan_length=len(log_a), n0_substituted=n0 is None, trace=trace)
    if not result.within_window:
        logger.warning(f"main polynomial found at m0={m} > 2N+1={2 * N + 1}; the premise index <= N may not hold")
    return result


def main_polynomial_report(result: MainPolySearchResult) -> CriterionReport:
    return CriterionReport(
        TheoremId.MAIN_POLYNOMIAL, Verdict.HOLDS,
        witness={'m0': result.m0, 'k0': result.k0, 'r': result.r_log.to_dict(), 'c': result.c_log.to_dict(),
                 'within_window': result.within_window},
        sampling={'scan_length': result.scan_length, 'n0_substituted': result.n0_substituted,
                  'trace': [s.to_dict() for s in result.trace]})


def verify_main_polynomial(coeffs: CoeffTable, L, z0: BidiscPoint, R: Radii, k0: int,
                           samples: Optional[int] = None) -> CriterionReport:
    """Check that the degree-k0 band dominates the rest of the series on T^2(z0, R/L(z0)).

    LHS is max |sum_{||K|| != k0} b_K (z - z0)^K| over the skeleton samples and
    RHS is half of max_{||J|| = k0} |b_J| rho^J with rho = R / L(z0).
    """
    if z0 != coeffs.center:
        raise DomainViolation(f"Table is centered at {coeffs.center.as_tuple()}, not {z0.as_tuple()}")
    if not 0 <= k0 <= coeffs.order:
        raise DomainViolation(f"k0 must lie in [0, {coeffs.order}], got {k0}")
    rho = R.over(*L.at(z0))
    check_skeleton(z0, rho)
    ext = coeffs.extraction_radii
    if ext is not None and (rho.r1 > ext.r1 or rho.r2 > ext.r2):
        raise SkeletonOutsideDomain(f"Skeleton radii {rho.to_dict()} exceed the extraction radii {ext.to_dict()}")
    n = int(samples or get_config()['skeleton_samples'])

    j = np.arange(coeffs.order + 1, dtype=float)
    terms = coeffs.log_abs + j[:, None] * math.log(rho.r1) + j[None, :] * math.log(rho.r2)
    deg = total_degree(coeffs.order)
    band = np.where(deg == k0, terms, LOG_ZERO).max()
    sampling = {'radii': rho.to_dict(), 'skeleton_samples': n, 'order': coeffs.order}
    if band == LOG_ZERO:
        return CriterionReport(TheoremId.MAIN_POLYNOMIAL, Verdict.FAILS, witness={'k0': k0}, sampling=sampling,
                               worst_point=z0, reason=f"EmptyBand: no nonzero coefficient of degree {k0}")
    rhs_log = float(band) - math.log(2.0)

    rest = np.where(deg != k0, terms, LOG_ZERO)
    finite = np.isfinite(rest)
    lhs_log, worst = LOG_ZERO, z0
    if finite.any():
        shift = float(rest[finite].max())
        c = np.where(finite, np.exp(np.where(finite, rest, 0.0) - shift + 1j * coeffs.phase), 0.0)
        w = np.exp(2j * np.pi * np.arange(n) / n)
        w1, w2 = np.meshgrid(w, w, indexing='ij')
        mod = np.abs(npoly.polyval2d(w1, w2, c))
        k = np.unravel_index(int(np.argmax(mod)), mod.shape)
        if mod[k] > 0:
            lhs_log = shift + math.log(float(mod[k]))
            worst = BidiscPoint(z0.z1 + rho.r1 * w1[k], z0.z2 + rho.r2 * w2[k])

    holds = lhs_log <= rhs_log + math.log1p(_slack())
    return CriterionReport(
        TheoremId.MAIN_POLYNOMIAL, Verdict.HOLDS if holds else Verdict.FAILS,
        witness={'k0': k0, 'lhs': _value(lhs_log), 'rhs': _value(rhs_log), 'log_lhs': lhs_log, 'log_rhs': rhs_log},
        sampling=sampling, worst_point=worst,
        reason=None if holds else "Other bands exceed half of the degree-k0 band")


__all__ = [
    'dominance_extraction_radii', 'check_local_dominance', 'check_kth_max_modulus', 'check_pure_partials', 'check_modulus_ratio',
    'index_bound_from_ratio', 'check_hayman', 'check_tail_dominance', 'MainPolyStep',
    'MainPolySearchResult', 'find_main_polynomial', 'main_polynomial_report', 'verify_main_polynomial',
]
