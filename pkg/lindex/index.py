"""Local L-index, index profiles, maximal term, skeleton max modulus and q(R).

The local index at z0 is the least m such that every normalized derivative
a*_K with ||K|| <= cap is dominated, up to the relative slack ``tol``, by the
largest a*_J with ||J|| <= m. Indices beyond the cap are covered by the
truncation contract: a result whose normalized top band is not negligible is
reported Inconclusive instead of certified.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_FLOOR, Decimal, localcontext
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.load_config import get_config, resolve_max_workers
from lindex.coefficients import CoeffTable, diagonal_max, expand, normalize
from lindex.domain import (
    LOG_ZERO, AnalyticFunction, BidiscPoint, LogMagnitude, MultiIndex, PolarGrid, Radii, Verdict,
    degree_enumerate, skeleton_samples, total_degree,
)
from lindex.errors import DomainViolation, NoNonzeroCoefficient, SkeletonOutsideDomain, TruncationUnsound

logger = logging.getLogger(__name__)

PROFILE_COLUMNS = ['re(z1)', 'im(z1)', 're(z2)', 'im(z2)', 'n0', 'argmax_j1', 'argmax_j2', 'slack']
# floats hold every integer below 2**53
EXACT_FLOAT_LOG = 53 * math.log(2)


@dataclass(frozen=True)
class LocalIndexResult:
    """Local index at one point.

    ``n0`` is None when the running maximum still grows at the top band
    (unbounded within ``cap``). ``slack`` is the log ratio between the
    dominating value and the largest a*_K beyond degree n0 (inf if none).
    """
    point: BidiscPoint
    n0: Optional[int]
    argmax_index: MultiIndex
    dominating_value: LogMagnitude
    cap: int
    slack: float
    tail_indicator: float
    status: Verdict = Verdict.HOLDS
    reason: Optional[str] = None

    @property
    def unbounded(self) -> bool:
        return self.n0 is None

    @property
    def conclusive(self) -> bool:
        return self.status is Verdict.HOLDS

    def to_dict(self) -> Dict[str, Any]:
        return {
            'point': self.point.to_dict(),
            'n0': self.n0,
            'unbounded': self.unbounded,
            'argmax_index': self.argmax_index.to_list(),
            'dominating_value': self.dominating_value.to_dict(),
            'cap': self.cap,
            'slack': self.slack,
            'tail_indicator': self.tail_indicator,
            'status': self.status.value,
            'reason': self.reason,
        }


def _truncation_reason(grid, coeffs: CoeffTable, threshold: float) -> Optional[str]:
    if grid.tail_indicator > threshold:
        return f"TruncationUnsound: normalized top band {grid.tail_indicator:.3g} > {threshold:.1g}"
    rho = coeffs.extraction_radii
    if coeffs.method == 'cauchy' and rho is not None:
        l1, l2 = grid.weight_at_center
        if rho.r1 * l1 <= 1.0 or rho.r2 * l2 <= 1.0:
            return "TruncationUnsound: extraction radius does not exceed 1/L(z0)"
        if coeffs.tail_indicator > threshold:
            return f"TruncationUnsound: extraction tail {coeffs.tail_indicator:.3g} > {threshold:.1g}"
    return None


def local_index(F: AnalyticFunction, L, z0: BidiscPoint, cap: Optional[int] = None,
                tol: Optional[float] = None, strict: bool = False,
                coeffs: Optional[CoeffTable] = None) -> LocalIndexResult:
    cfg = get_config()
    cap = int(cap if cap is not None else cfg['default_cap'])
    tol = float(tol if tol is not None else cfg['index_tol'])
    if cap < 1:
        raise DomainViolation(f"cap must be >= 1, got {cap}")
    if tol < 0:
        raise DomainViolation(f"tol must be >= 0, got {tol}")

    coeffs = coeffs if coeffs is not None else expand(F, z0, cap)
    grid = normalize(coeffs, L)
    band = diagonal_max(grid)
    prefix = np.maximum.accumulate(band)
    overall = prefix[-1]
    log_slack = math.log1p(tol)

    if overall == LOG_ZERO:
        return LocalIndexResult(z0, 0, MultiIndex(0, 0), LogMagnitude.zero(), cap, math.inf, 0.0)

    n0 = int(np.argmax(prefix + log_slack >= overall))
    dominating = float(prefix[n0])
    argmax = next(K for K in degree_enumerate(n0) if grid.log_values[K] == dominating)
    beyond = float(band[n0 + 1:].max()) if n0 < cap else LOG_ZERO
    slack = dominating - beyond if beyond > LOG_ZERO else math.inf

    status, reason = Verdict.HOLDS, None
    if n0 == cap:
        status, reason = Verdict.INCONCLUSIVE, f"Unbounded({cap}): running maximum still grows at the top band"
    else:
        reason = _truncation_reason(grid, coeffs, float(cfg['truncation_threshold']))
        if reason:
            status = Verdict.INCONCLUSIVE
    if status is Verdict.INCONCLUSIVE:
        logger.debug(f"local index at ({z0.z1}, {z0.z2}) inconclusive: {reason}")
        if strict:
            raise TruncationUnsound(reason)
    return LocalIndexResult(
        point=z0,
        n0=None if n0 == cap else n0,
        argmax_index=MultiIndex(int(argmax[0]), int(argmax[1])),
        dominating_value=LogMagnitude(dominating),
        cap=cap,
        slack=slack,
        tail_indicator=grid.tail_indicator,
        status=status,
        reason=reason,
    )


# --- profiles ---------------------------------------------------------------

def default_exhaustion(levels: Optional[Sequence[float]] = None,
                       grid: Optional[Tuple[int, int]] = None) -> List[PolarGrid]:
    cfg = get_config()
    levels = levels if levels is not None else cfg['exhaustion_levels']
    n_r, n_t = grid or cfg['exhaustion_grid']
    return [PolarGrid(int(n_r), int(n_t), float(level), include_center=False) for level in levels]


@dataclass
class IndexProfile:
    levels: List[Dict[str, Any]]
    per_point: List[Tuple[int, LocalIndexResult]] = field(default_factory=list)
    sup_per_grid: List[Optional[int]] = field(default_factory=list)
    inconclusive_per_grid: List[int] = field(default_factory=list)

    @property
    def inconclusive_count(self) -> int:
        return sum(self.inconclusive_per_grid)

    @property
    def sup(self) -> Optional[int]:
        return self.sup_per_grid[-1] if self.sup_per_grid else None

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for level, res in self.per_point:
            p = res.point
            rows.append({
                're(z1)': p.z1.real, 'im(z1)': p.z1.imag, 're(z2)': p.z2.real, 'im(z2)': p.z2.imag,
                'n0': res.n0 if res.conclusive else None,
                'argmax_j1': res.argmax_index.k1, 'argmax_j2': res.argmax_index.k2,
                'slack': res.slack if math.isfinite(res.slack) else None,
            })
        return pd.DataFrame(rows, columns=PROFILE_COLUMNS)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'levels': self.levels,
            'sup_per_grid': self.sup_per_grid,
            'inconclusive_per_grid': self.inconclusive_per_grid,
            'points': len(self.per_point),
        }


def index_profile(F: AnalyticFunction, L, exhaustion: Optional[Sequence] = None, cap: Optional[int] = None,
                  tol: Optional[float] = None, max_workers: Optional[int] = None) -> IndexProfile:
    """Local index over each exhaustion grid; sup per grid is cumulative, hence non-decreasing."""
    grids = list(exhaustion) if exhaustion is not None else default_exhaustion()
    profile = IndexProfile(levels=[g.describe() for g in grids])
    workers = resolve_max_workers(max_workers)
    running: Optional[int] = None
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for level, grid in enumerate(grids):
            points = list(grid.iter_points())
            results = list(pool.map(lambda p: local_index(F, L, p, cap=cap, tol=tol), points))
            conclusive = [r.n0 for r in results if r.conclusive]
            if conclusive:
                running = max(conclusive) if running is None else max(running, max(conclusive))
            profile.per_point.extend((level, r) for r in results)
            profile.sup_per_grid.append(running)
            profile.inconclusive_per_grid.append(len(results) - len(conclusive))
            logger.info(f"level {level}: {len(points)} points, sup n0={running}, "
                        f"inconclusive={len(results) - len(conclusive)}")
    return profile


# --- maximal term and max modulus --------------------------------------------

@dataclass(frozen=True)
class MaximalTermResult:
    mu: LogMagnitude
    nu_set: List[MultiIndex]
    nu_norm: int

    def to_dict(self) -> Dict[str, Any]:
        return {'mu': self.mu.to_dict(), 'nu_set': [K.to_list() for K in self.nu_set], 'nu_norm': self.nu_norm}


def maximal_term(coeffs: CoeffTable, R: Radii, tol: Optional[float] = None) -> MaximalTermResult:
    """mu = max |b_K| R^K over the table; nu_set lists every index within the relative slack."""
    if coeffs.order < 1:
        raise DomainViolation("maximal_term needs a table of order >= 1")
    tol = float(tol if tol is not None else get_config()['index_tol'])
    j = np.arange(coeffs.order + 1, dtype=float)
    terms = coeffs.log_abs + j[:, None] * math.log(R.r1) + j[None, :] * math.log(R.r2)
    terms = np.where(total_degree(coeffs.order) <= coeffs.order, terms, LOG_ZERO)
    mu = float(terms.max())
    if mu == LOG_ZERO:
        raise NoNonzeroCoefficient("All coefficients of the table vanish")
    threshold = mu - math.log1p(tol)
    nu = [K for K in degree_enumerate(coeffs.order) if terms[K] >= threshold]
    return MaximalTermResult(LogMagnitude(mu), nu, max(K.order for K in nu))


@dataclass(frozen=True)
class MaxModulusResult:
    log_m: LogMagnitude
    argmax: BidiscPoint
    n_samples: int

    @property
    def M(self) -> float:
        return self.log_m.value

    def to_dict(self) -> Dict[str, Any]:
        return {'M': self.M, 'log_M': self.log_m.log_abs, 'argmax': self.argmax.to_dict(),
                'n_samples': self.n_samples}


def check_skeleton(z0: BidiscPoint, R: Radii) -> None:
    if abs(z0.z1) + R.r1 >= 1.0 or abs(z0.z2) + R.r2 >= 1.0:
        raise SkeletonOutsideDomain(
            f"Skeleton around ({z0.z1}, {z0.z2}) with radii ({R.r1}, {R.r2}) leaves the bidisc")


def max_modulus(F: AnalyticFunction, z0: BidiscPoint, R: Radii, n_samples: Optional[int] = None) -> MaxModulusResult:
    """max |F| over the n x n skeleton samples of T^2(z0, R)."""
    check_skeleton(z0, R)
    n = int(n_samples or get_config()['skeleton_samples'])
    z1, z2 = skeleton_samples(z0, R, n)
    log_abs = F.log_abs(z1, z2)
    k = np.unravel_index(int(np.argmax(log_abs)), log_abs.shape)
    return MaxModulusResult(LogMagnitude(float(log_abs[k])), BidiscPoint(z1[k], z2[k]), n)


# --- q(R) -------------------------------------------------------------------

def _lambda_pairs(lambdas) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    if hasattr(lambdas, 'lambda1'):
        return tuple(lambdas.lambda1), tuple(lambdas.lambda2)
    lam1, lam2 = lambdas
    return tuple(lam1), tuple(lam2)


def q_constant(N: int, R: Radii, lambdas) -> int:
    """floor(2(N+1)(r1+r2) prod_j lambda1_j^-N lambda2_j^(N+1)) + 1.

    ``lambdas`` is a LambdaEstimate or a pair (lambda1, lambda2).
    """
    lam1, lam2 = _lambda_pairs(lambdas)
    if any(not (0 < lo <= hi) for lo, hi in zip(lam1, lam2)):
        raise DomainViolation(f"Inconsistent lambda bounds {lam1} / {lam2}")
    if N < 0:
        raise DomainViolation(f"N must be >= 0, got {N}")
    log_val = math.log(2 * (N + 1) * (R.r1 + R.r2)) + sum(
        -N * math.log(lo) + (N + 1) * math.log(hi) for lo, hi in zip(lam1, lam2))
    if log_val < EXACT_FLOAT_LOG:
        val = 2 * (N + 1) * (R.r1 + R.r2)
        for lo, hi in zip(lam1, lam2):
            val *= lo ** (-N) * hi ** (N + 1)
        return int(math.floor(val)) + 1
    # integer digits plus guard digits
    with localcontext() as ctx:
        ctx.prec = int(log_val / math.log(10)) + 30
        val = Decimal(2 * (N + 1)) * (Decimal(R.r1) + Decimal(R.r2))
        for lo, hi in zip(lam1, lam2):
            val *= Decimal(hi) ** (N + 1) / Decimal(lo) ** N
        return int(val.to_integral_value(rounding=ROUND_FLOOR)) + 1


__all__ = [
    'LocalIndexResult', 'local_index', 'default_exhaustion', 'IndexProfile', 'index_profile',
    'MaximalTermResult', 'maximal_term', 'MaxModulusResult', 'max_modulus', 'check_skeleton',
    'q_constant', 'PROFILE_COLUMNS',
]
