"""Weight fields L = (l1, l2) on the bidisc.

Evaluation, admissibility checks (l_j > beta / (1 - |z_j|)), sampled estimates
of the ratio bounds lambda_1 / lambda_2 over polydiscs of radii R / L(z0),
comparability of two weights and the scaled weight L* = (beta l1 / r1, beta l2 / r2).
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from config.load_config import get_config
from lindex.domain import BidiscPoint, PolarGrid, Radii, disc_offsets, inside_bidisc
from lindex.errors import DomainViolation, EvaluatorFailure, SpecError

logger = logging.getLogger(__name__)

Pair = Tuple[float, float]


class WeightFamily(str, Enum):
    BOUNDARY_POWER = 'boundary_power'
    CONSTANT = 'constant'
    CUSTOM = 'custom'


@dataclass(frozen=True, eq=False)
class WeightField:
    """A pair of positive weights with admissibility parameter beta > 1.

    Args:
        family: boundary_power, constant or custom.
        beta: admissibility parameter.
        values: per-component scale sigma_j (boundary_power) or constants c_j.
        exponents: ((alpha_1, gamma_1), (alpha_2, gamma_2)) with
            l_j = sigma_j / ((1-|z1|)^exponents[j][0] (1-|z2|)^exponents[j][1]).
        evaluator: for custom weights, callable (z1, z2) -> (l1, l2) on arrays.
        factors: componentwise multipliers applied on top of the base weight.
    """
    family: WeightFamily
    beta: float
    values: Pair = (1.0, 1.0)
    exponents: Tuple[Pair, Pair] = ((0.0, 0.0), (0.0, 0.0))
    evaluator: Optional[Callable] = None
    factors: Pair = (1.0, 1.0)
    label: str = ''

    def __post_init__(self):
        if not self.beta > 1.0:
            raise DomainViolation(f"beta must exceed 1, got {self.beta}")
        if min(self.values) <= 0 or min(self.factors) <= 0:
            raise DomainViolation(f"Weight scales must be positive, got {self.values} x {self.factors}")

    @classmethod
    def boundary_power(cls, exponents, scale: Union[float, Pair] = 1.0,
                       beta: Optional[float] = None, label: str = 'boundary_power') -> 'WeightField':
        values = _pair(scale)
        exps = tuple((float(e[0]), float(e[1])) for e in exponents)
        if len(exps) != 2:
            raise DomainViolation(f"boundary_power needs two exponent pairs, got {exponents!r}")
        return cls(WeightFamily.BOUNDARY_POWER, _beta(beta), values=values, exponents=exps, label=label)

    @classmethod
    def constant(cls, c1: float, c2: float, beta: Optional[float] = None,
                 label: str = 'constant') -> 'WeightField':
        return cls(WeightFamily.CONSTANT, _beta(beta), values=(float(c1), float(c2)), label=label)

    @classmethod
    def custom(cls, evaluator: Callable, beta: Optional[float] = None, label: str = 'custom') -> 'WeightField':
        return cls(WeightFamily.CUSTOM, _beta(beta), evaluator=evaluator, label=label)

    @property
    def separable(self) -> bool:
        return self.family is not WeightFamily.CUSTOM

    def coordinate_factor(self, j: int, axis: int, z) -> np.ndarray:
        """The axis-coordinate factor (1 - |z|)^(-exponent) of the base l_j."""
        e = self.exponents[j][axis]
        return (1.0 - np.abs(z)) ** (-e) if e else np.ones(np.shape(z))

    def base(self, z1, z2) -> Tuple[np.ndarray, np.ndarray]:
        z1 = np.asarray(z1, dtype=complex)
        z2 = np.asarray(z2, dtype=complex)
        if self.family is WeightFamily.CUSTOM:
            try:
                l1, l2 = self.evaluator(z1, z2)
            except Exception as e:
                raise EvaluatorFailure(f"Weight {self.label!r} raised: {e}") from e
            shape = np.broadcast(z1, z2).shape
            return (np.broadcast_to(np.asarray(l1, dtype=float), shape),
                    np.broadcast_to(np.asarray(l2, dtype=float), shape))
        out = []
        for j in range(2):
            out.append(self.values[j] * self.coordinate_factor(j, 0, z1) * self.coordinate_factor(j, 1, z2))
        shape = np.broadcast(z1, z2).shape
        return np.broadcast_to(out[0], shape), np.broadcast_to(out[1], shape)

    def evaluate(self, z1, z2) -> Tuple[np.ndarray, np.ndarray]:
        b1, b2 = self.base(z1, z2)
        l1, l2 = b1 * self.factors[0], b2 * self.factors[1]
        for l in (l1, l2):
            if not np.all(np.isfinite(l) & (l > 0)):
                raise EvaluatorFailure(f"Weight {self.label!r} is not finite and positive on the sample set")
        return l1, l2

    def at(self, point: BidiscPoint) -> Pair:
        l1, l2 = self.evaluate(point.z1, point.z2)
        return float(l1), float(l2)

    def scaled_by(self, c: Union[float, Pair]) -> 'WeightField':
        c1, c2 = _pair(c)
        return replace(self, factors=(self.factors[0] * c1, self.factors[1] * c2))

    def same_base(self, other: 'WeightField') -> bool:
        return (self.family is other.family and self.values == other.values
                and self.exponents == other.exponents and self.evaluator is other.evaluator)

    def to_spec(self) -> Dict[str, Any]:
        if self.family is WeightFamily.CUSTOM:
            raise SpecError(f"Custom weight {self.label!r} has no spec form")
        values = [v * f for v, f in zip(self.values, self.factors)]
        if self.family is WeightFamily.CONSTANT:
            return {'family': 'constant', 'beta': self.beta, 'values': values}
        return {'family': 'boundary_power', 'beta': self.beta,
                'exponents': [list(e) for e in self.exponents], 'scale': values}

    def describe(self) -> Dict[str, Any]:
        return {'label': self.label, 'family': self.family.value, 'beta': self.beta}


def _pair(x: Union[float, Pair]) -> Pair:
    if isinstance(x, (list, tuple, np.ndarray)):
        if len(x) != 2:
            raise DomainViolation(f"Expected a pair, got {x!r}")
        return float(x[0]), float(x[1])
    return float(x), float(x)


def _beta(beta: Optional[float]) -> float:
    return float(beta) if beta is not None else float(get_config()['default_beta'])


def _default_outer_grid() -> PolarGrid:
    cfg = get_config()
    n_r, n_t = cfg['outer_grid']
    return PolarGrid(int(n_r), int(n_t), float(cfg['outer_max_radius']))


# --- admissibility ----------------------------------------------------------

@dataclass(frozen=True)
class AdmissibilityReport:
    admissible_fraction: float
    worst_margin: float
    worst_point: BidiscPoint
    grid: Dict[str, Any]

    @property
    def admissible(self) -> bool:
        return self.admissible_fraction == 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {'admissible_fraction': self.admissible_fraction, 'worst_margin': self.worst_margin,
                'worst_point': self.worst_point.to_dict(), 'grid': self.grid}


def validate_weight(L: WeightField, grid=None) -> AdmissibilityReport:
    """Fraction of grid points where l_j(z)(1 - |z_j|) > beta for both j, and the worst margin."""
    grid = grid or _default_outer_grid()
    z1, z2 = grid.points()
    l1, l2 = L.evaluate(z1, z2)
    margin = np.minimum(l1 * (1.0 - np.abs(z1)), l2 * (1.0 - np.abs(z2))) - L.beta
    worst = int(np.argmin(margin))
    report = AdmissibilityReport(
        admissible_fraction=float(np.mean(margin > 0)),
        worst_margin=float(margin[worst]),
        worst_point=BidiscPoint(z1[worst], z2[worst]),
        grid=grid.describe(),
    )
    if not report.admissible:
        logger.info(f"Weight {L.label!r} inadmissible on {100 * (1 - report.admissible_fraction):.1f}% "
                    f"of the grid, worst margin {report.worst_margin:.4g}")
    return report


# --- lambda bounds ----------------------------------------------------------

@dataclass(frozen=True)
class LambdaEstimate:
    """Sampled inf/sup of l_j(z)/l_j(z0) over the polydiscs of radii R / L(z0)."""
    r: Radii
    lambda1: Pair
    lambda2: Pair
    outer_grid: Dict[str, Any]
    inner_grid: Dict[str, Any]
    clipped: bool = False
    refinement_delta: Optional[Tuple[Pair, Pair]] = None

    @property
    def q2_consistent(self) -> bool:
        return (not self.clipped) and all(
            0 < lo <= hi < math.inf for lo, hi in zip(self.lambda1, self.lambda2))

    def to_dict(self) -> Dict[str, Any]:
        out = {'r': self.r.to_dict(), 'lambda1': list(self.lambda1), 'lambda2': list(self.lambda2),
               'outer_grid': self.outer_grid, 'inner_grid': self.inner_grid,
               'clipped': self.clipped, 'q2_consistent': self.q2_consistent}
        if self.refinement_delta is not None:
            out['refinement_delta'] = {'lambda1': list(self.refinement_delta[0]),
                                       'lambda2': list(self.refinement_delta[1])}
        return out


def lambda_bounds(L: WeightField, R: Radii, outer_grid=None, inner_grid: Optional[Tuple[int, int]] = None,
                  refine_check: bool = False) -> LambdaEstimate:
    """Estimate lambda_{1,j}(R) and lambda_{2,j}(R) on nested polar grids.

    Inner samples that fall outside the open bidisc are discarded and the
    estimate is flagged as clipped. With ``refine_check`` both grids are
    refined once and the change in each bound is reported.
    """
    R.require_q2(L.beta)
    outer_grid = outer_grid or _default_outer_grid()
    inner_grid = tuple(inner_grid or get_config()['inner_grid'])
    lam1, lam2, clipped = _lambda_scan(L, R, outer_grid, inner_grid)
    delta = None
    if refine_check:
        fine = (2 * inner_grid[0], 2 * inner_grid[1])
        f1, f2, fclipped = _lambda_scan(L, R, outer_grid.refined(), fine)
        delta = (tuple(a - b for a, b in zip(lam1, f1)), tuple(b - a for a, b in zip(lam2, f2)))
        lam1, lam2, clipped = f1, f2, clipped or fclipped
        outer_grid, inner_grid = outer_grid.refined(), fine
    if clipped:
        logger.warning(f"Inner polydiscs of {L.label!r} leave the bidisc at R=({R.r1}, {R.r2}); "
                       f"weight is not admissible there")
    return LambdaEstimate(r=R, lambda1=lam1, lambda2=lam2, outer_grid=outer_grid.describe(),
                          inner_grid={'n_radial': inner_grid[0], 'n_angular': inner_grid[1]},
                          clipped=clipped, refinement_delta=delta)


def _lambda_scan(L: WeightField, R: Radii, outer_grid, inner_grid) -> Tuple[Pair, Pair, bool]:
    a1, a2 = outer_grid.points()
    l1o, l2o = L.evaluate(a1, a2)
    offs = disc_offsets(*inner_grid)
    s1 = a1[:, None] + (R.r1 / l1o)[:, None] * offs[None, :]
    s2 = a2[:, None] + (R.r2 / l2o)[:, None] * offs[None, :]
    ok1, ok2 = np.abs(s1) < 1.0, np.abs(s2) < 1.0
    clipped = bool(not ok1.all() or not ok2.all())
    if L.separable:
        lo, hi = _separable_extremes(L, a1, a2, s1, s2, ok1, ok2)
    else:
        lo, hi = _brute_extremes(L, s1, s2, ok1, ok2, (l1o, l2o))
    return (float(lo[0]), float(lo[1])), (float(hi[0]), float(hi[1])), clipped


def _separable_extremes(L, a1, a2, s1, s2, ok1, ok2):
    # ratio l_j(z)/l_j(z0) factors into a z1 part and a z2 part; extremes over
    # the product sample set are products of the per-coordinate extremes
    lo, hi = [], []
    for j in range(2):
        f1 = np.where(ok1, L.coordinate_factor(j, 0, np.where(ok1, s1, 0)) / L.coordinate_factor(j, 0, a1)[:, None],
                      np.nan)
        f2 = np.where(ok2, L.coordinate_factor(j, 1, np.where(ok2, s2, 0)) / L.coordinate_factor(j, 1, a2)[:, None],
                      np.nan)
        lo.append(np.min(np.nanmin(f1, axis=1) * np.nanmin(f2, axis=1)))
        hi.append(np.max(np.nanmax(f1, axis=1) * np.nanmax(f2, axis=1)))
    return lo, hi


def _brute_extremes(L, s1, s2, ok1, ok2, center_values):
    lo = [math.inf, math.inf]
    hi = [-math.inf, -math.inf]
    for i in range(s1.shape[0]):
        z1, z2 = np.meshgrid(s1[i][ok1[i]], s2[i][ok2[i]], indexing='ij')
        l1, l2 = L.evaluate(z1.ravel(), z2.ravel())
        for j, lj in enumerate((l1, l2)):
            ratio = lj / center_values[j][i]
            lo[j] = min(lo[j], float(ratio.min()))
            hi[j] = max(hi[j], float(ratio.max()))
    return lo, hi


# --- comparability ----------------------------------------------------------

class Comparability(str, Enum):
    COMPARABLE = 'Comparable'
    NOT_COMPARABLE = 'NotComparable'
    INCONCLUSIVE = 'Inconclusive'


@dataclass(frozen=True)
class ComparabilityWitness:
    theta_low: Pair
    theta_high: Pair
    verdict: Comparability
    spreads: Tuple[float, ...] = field(default_factory=tuple)

    def to_dict(self) -> Dict[str, Any]:
        return {'theta_low': list(self.theta_low), 'theta_high': list(self.theta_high),
                'verdict': self.verdict.value, 'spreads': list(self.spreads)}


def _ratios(L: WeightField, Lt: WeightField, z1, z2) -> Tuple[np.ndarray, np.ndarray]:
    if L.same_base(Lt):
        base = (np.ones(np.shape(z1)), np.ones(np.shape(z1)))
    else:
        b1, b2 = L.base(z1, z2)
        t1, t2 = Lt.base(z1, z2)
        base = (b1 / t1, b2 / t2)
    return tuple(base[j] * (L.factors[j] / Lt.factors[j]) for j in range(2))


def comparability(L: WeightField, Ltilde: WeightField, grid=None,
                  boundary_levels: Optional[List[float]] = None,
                  spread_cap: Optional[float] = None, growth: Optional[float] = None) -> ComparabilityWitness:
    """Observed bounds theta_low <= l_j / ltilde_j <= theta_high and a divergence verdict.

    The grid is extended by rings at each boundary level; the ratio spread
    max_j(theta_high/theta_low) is tracked level by level. A spread above
    ``spread_cap`` or one that grows by ``growth`` at every level means the
    weights are not comparable; growth at only some levels is inconclusive.
    """
    cfg = get_config()
    grid = grid or _default_outer_grid()
    levels = boundary_levels if boundary_levels is not None else cfg['comparability_boundary_levels']
    spread_cap = spread_cap if spread_cap is not None else float(cfg['comparability_spread_cap'])
    growth = growth if growth is not None else float(cfg['comparability_growth'])

    z1, z2 = grid.points()
    n_angular = getattr(grid, 'n_angular', 8)
    lo = np.full(2, math.inf)
    hi = np.full(2, -math.inf)

    def absorb(a1, a2):
        r = _ratios(L, Ltilde, a1, a2)
        for j in range(2):
            if not np.all(np.isfinite(r[j]) & (r[j] > 0)):
                return False
            lo[j] = min(lo[j], float(r[j].min()))
            hi[j] = max(hi[j], float(r[j].max()))
        return True

    finite = absorb(z1, z2)
    spreads: List[float] = []
    for level in levels:
        ring = np.concatenate([[0j], level * np.exp(2j * np.pi * np.arange(n_angular) / n_angular)])
        r1, r2 = np.meshgrid(ring, ring, indexing='ij')
        finite = absorb(r1.ravel(), r2.ravel()) and finite
        spreads.append(float(np.max(hi / lo)))

    if not finite:
        verdict = Comparability.INCONCLUSIVE
    else:
        final_spread = spreads[-1] if spreads else float(np.max(hi / lo))
        growing = [b >= growth * a for a, b in zip(spreads, spreads[1:])]
        if final_spread > spread_cap or (growing and all(growing)):
            verdict = Comparability.NOT_COMPARABLE
        elif any(growing):
            verdict = Comparability.INCONCLUSIVE
        else:
            verdict = Comparability.COMPARABLE
    logger.debug(f"comparability {L.label!r} vs {Ltilde.label!r}: spreads={spreads} -> {verdict.value}")
    return ComparabilityWitness(theta_low=(float(lo[0]), float(lo[1])), theta_high=(float(hi[0]), float(hi[1])),
                                verdict=verdict, spreads=tuple(spreads))


def scaled_weight(L: WeightField, R: Radii) -> WeightField:
    """L* = (beta l1 / r1, beta l2 / r2)."""
    R.require_q2(L.beta)
    return replace(L.scaled_by((L.beta / R.r1, L.beta / R.r2)), label=f"{L.label}*")


# --- specs ------------------------------------------------------------------

def weight_from_spec(spec: Dict[str, Any]) -> WeightField:
    if not isinstance(spec, dict) or 'family' not in spec:
        raise SpecError("weight spec must be an object with a 'family' key")
    family = spec['family']
    beta = spec.get('beta')
    try:
        if family == 'boundary_power':
            return WeightField.boundary_power(spec['exponents'], spec.get('scale', 1.0), beta,
                                              label=spec.get('label', family))
        if family == 'constant':
            c1, c2 = spec['values']
            return WeightField.constant(c1, c2, beta, label=spec.get('label', family))
    except (KeyError, TypeError, ValueError) as e:
        raise SpecError(f"Malformed {family} weight spec: {e}")
    raise SpecError(f"Unknown weight family {family!r}")


def load_weight_spec(path: Union[str, Path]) -> WeightField:
    path = Path(path)
    try:
        spec = json.loads(path.read_text())
    except FileNotFoundError:
        raise SpecError(f"Weight spec not found: {path}")
    except json.JSONDecodeError as e:
        raise SpecError(f"Weight spec {path} is not valid JSON: {e}")
    return weight_from_spec(spec)


def example1_weight(beta: float = 2.0, rescale: bool = True) -> WeightField:
    """l1 = s / ((1-|z1|)^2 (1-|z2|)), l2 = s / ((1-|z1|)(1-|z2|)^2), with s = 2 beta when rescaled."""
    scale = 2.0 * beta if rescale else 1.0
    return WeightField.boundary_power(((2, 1), (1, 2)), scale=scale, beta=beta,
                                      label='example1' + ('_rescaled' if rescale else ''))


__all__ = [
    'WeightFamily', 'WeightField', 'AdmissibilityReport', 'validate_weight', 'LambdaEstimate',
    'lambda_bounds', 'Comparability', 'ComparabilityWitness', 'comparability', 'scaled_weight',
    'weight_from_spec', 'load_weight_spec', 'example1_weight',
]
