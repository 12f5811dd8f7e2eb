"""Core types shared by every module.

Points and radii on the bidisc, multi-indices and their canonical order,
log-domain magnitudes, sampling grids, the three function representations
and the report envelope returned by every checker.

All types are immutable after construction and safe to share between worker
threads.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import total_ordering
from typing import Any, Callable, Dict, Iterator, List, NamedTuple, Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.special import gammaln

from lindex.errors import DegenerateRadius, DomainViolation, EvaluatorFailure

logger = logging.getLogger(__name__)

LOG_ZERO = -math.inf


def log_abs_array(values) -> np.ndarray:
    """Natural log of |values|; exact zeros map to -inf without a warning."""
    with np.errstate(divide='ignore'):
        return np.log(np.abs(np.asarray(values)))


def log_factorial(k) -> np.ndarray:
    return gammaln(np.asarray(k, dtype=float) + 1.0)


@dataclass(frozen=True)
class BidiscPoint:
    """A point (z1, z2) of the open unit bidisc."""
    z1: complex
    z2: complex

    def __post_init__(self):
        object.__setattr__(self, 'z1', complex(self.z1))
        object.__setattr__(self, 'z2', complex(self.z2))
        if not (abs(self.z1) < 1.0 and abs(self.z2) < 1.0):
            raise DomainViolation(f"Point ({self.z1}, {self.z2}) lies outside the open bidisc")

    @classmethod
    def origin(cls) -> 'BidiscPoint':
        return cls(0j, 0j)

    @property
    def moduli(self) -> Tuple[float, float]:
        return abs(self.z1), abs(self.z2)

    def as_tuple(self) -> Tuple[complex, complex]:
        return self.z1, self.z2

    def to_dict(self) -> Dict[str, List[float]]:
        return {'z1': [self.z1.real, self.z1.imag], 'z2': [self.z2.real, self.z2.imag]}


@dataclass(frozen=True)
class Radii:
    """A pair of strictly positive radii R = (r1, r2)."""
    r1: float
    r2: float

    def __post_init__(self):
        object.__setattr__(self, 'r1', float(self.r1))
        object.__setattr__(self, 'r2', float(self.r2))
        for r in (self.r1, self.r2):
            if not (math.isfinite(r) and r > 0.0):
                raise DegenerateRadius(f"Radii must be positive and finite, got ({self.r1}, {self.r2})")

    def as_array(self) -> np.ndarray:
        return np.array([self.r1, self.r2])

    def scaled(self, t: float) -> 'Radii':
        return Radii(self.r1 * t, self.r2 * t)

    def over(self, l1: float, l2: float) -> 'Radii':
        """R / L(z0): componentwise division by weight values."""
        return Radii(self.r1 / l1, self.r2 / l2)

    def require_q2(self, beta: float) -> None:
        if self.r1 > beta or self.r2 > beta:
            raise DomainViolation(f"Radii ({self.r1}, {self.r2}) exceed beta={beta}")

    def to_dict(self) -> Dict[str, float]:
        return {'r1': self.r1, 'r2': self.r2}


class MultiIndex(NamedTuple):
    k1: int
    k2: int

    @property
    def order(self) -> int:
        return self.k1 + self.k2

    def to_list(self) -> List[int]:
        return [int(self.k1), int(self.k2)]


def degree_enumerate(max_order: int) -> List[MultiIndex]:
    """All (k1, k2) with k1 + k2 <= max_order, by total degree then k1 ascending."""
    if max_order < 0:
        raise ValueError(f"max_order must be >= 0, got {max_order}")
    return [MultiIndex(k1, d - k1) for d in range(max_order + 1) for k1 in range(d + 1)]


def degree_mask(order: int) -> np.ndarray:
    """Boolean (order+1, order+1) mask of the total-degree simplex."""
    j = np.arange(order + 1)
    return (j[:, None] + j[None, :]) <= order


def total_degree(order: int) -> np.ndarray:
    j = np.arange(order + 1)
    return j[:, None] + j[None, :]


@total_ordering
@dataclass(frozen=True, eq=False)
class LogMagnitude:
    """A magnitude held as its natural log; -inf encodes zero.

    Ordering and products act on ``log_abs``; ``phase`` rides along for
    signed quantities and is ignored by comparisons.
    """
    log_abs: float
    phase: Optional[float] = None

    @classmethod
    def from_value(cls, x: complex) -> 'LogMagnitude':
        if isinstance(x, complex):
            phase = math.atan2(x.imag, x.real) if x != 0 else 0.0
        else:
            phase = None
        return cls(math.log(abs(x)) if x != 0 else LOG_ZERO, phase)

    @classmethod
    def zero(cls) -> 'LogMagnitude':
        return cls(LOG_ZERO)

    @property
    def is_zero(self) -> bool:
        return self.log_abs == LOG_ZERO

    @property
    def value(self) -> float:
        try:
            return math.exp(self.log_abs)
        except OverflowError:
            return math.inf

    def __mul__(self, other: 'LogMagnitude') -> 'LogMagnitude':
        phase = None
        if self.phase is not None and other.phase is not None:
            phase = self.phase + other.phase
        return LogMagnitude(self.log_abs + other.log_abs, phase)

    def __truediv__(self, other: 'LogMagnitude') -> 'LogMagnitude':
        if other.is_zero:
            raise ZeroDivisionError("division by a zero magnitude")
        phase = None
        if self.phase is not None and other.phase is not None:
            phase = self.phase - other.phase
        return LogMagnitude(self.log_abs - other.log_abs, phase)

    def __pow__(self, k: float) -> 'LogMagnitude':
        if self.is_zero:
            return LogMagnitude.zero() if k > 0 else LogMagnitude(0.0)
        return LogMagnitude(self.log_abs * k, None if self.phase is None else self.phase * k)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LogMagnitude):
            return NotImplemented
        return self.log_abs == other.log_abs

    def __lt__(self, other: 'LogMagnitude') -> bool:
        return self.log_abs < other.log_abs

    def __hash__(self) -> int:
        return hash(self.log_abs)

    def to_dict(self) -> Dict[str, Optional[float]]:
        out: Dict[str, Optional[float]] = {'log_abs': self.log_abs, 'value': self.value}
        if self.phase is not None:
            out['phase'] = self.phase
        return out


class Verdict(str, Enum):
    HOLDS = 'Holds'
    FAILS = 'Fails'
    INCONCLUSIVE = 'Inconclusive'

    @property
    def exit_code(self) -> int:
        return {Verdict.HOLDS: 0, Verdict.FAILS: 1, Verdict.INCONCLUSIVE: 2}[self]


class TheoremId(str, Enum):
    LOCAL_DOMINANCE = 'LocalDominance'
    KTH_MAX_MODULUS = 'KthMaxModulus'
    PURE_PARTIALS = 'PurePartials'
    MODULUS_RATIO = 'ModulusRatio'
    HAYMAN = 'Hayman'
    TAIL_DOMINANCE = 'TailDominance'
    MAIN_POLYNOMIAL = 'MainPolynomial'


@dataclass(frozen=True)
class CriterionReport:
    """Verdict of one checker with its witnesses and sampling metadata."""
    theorem_id: TheoremId
    verdict: Verdict
    witness: Dict[str, Any] = field(default_factory=dict)
    sampling: Dict[str, Any] = field(default_factory=dict)
    worst_point: Optional[BidiscPoint] = None
    reason: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'theorem_id': self.theorem_id.value,
            'verdict': self.verdict.value,
            'witness': self.witness,
            'sampling': self.sampling,
            'worst_point': self.worst_point.to_dict() if self.worst_point else None,
            'reason': self.reason,
        }


# --- sampling ---------------------------------------------------------------

def disc_offsets(n_radial: int, n_angular: int, include_center: bool = True) -> np.ndarray:
    """Polar samples of the closed unit disc: radii i/n_radial (i >= 1) times n_angular roots of unity."""
    if n_radial < 1 or n_angular < 1:
        raise ValueError(f"Grid counts must be >= 1, got {n_radial}x{n_angular}")
    t = np.arange(1, n_radial + 1) / n_radial
    w = np.exp(2j * np.pi * np.arange(n_angular) / n_angular)
    pts = (t[:, None] * w[None, :]).ravel()
    if include_center:
        pts = np.concatenate([[0j], pts])
    return pts


def polydisc_samples(center: BidiscPoint, radii: Radii, n_radial: int, n_angular: int):
    """Product samples of the closed polydisc around ``center``; the center comes first."""
    offs = disc_offsets(n_radial, n_angular)
    z1, z2 = np.meshgrid(center.z1 + radii.r1 * offs, center.z2 + radii.r2 * offs, indexing='ij')
    return z1.ravel(), z2.ravel()


def skeleton_samples(center: BidiscPoint, radii: Radii, n_samples: int):
    """The n x n torus samples z_j = z0_j + r_j * exp(2 pi i k / n), as (n, n) arrays."""
    w = np.exp(2j * np.pi * np.arange(n_samples) / n_samples)
    z1, z2 = np.meshgrid(center.z1 + radii.r1 * w, center.z2 + radii.r2 * w, indexing='ij')
    return z1, z2


def inside_bidisc(z1, z2) -> np.ndarray:
    return (np.abs(z1) < 1.0) & (np.abs(z2) < 1.0)


@dataclass(frozen=True)
class PolarGrid:
    """Product of two per-coordinate polar sample sets inside |z_j| <= max_radius.

    Each coordinate takes radii max_radius * i / n_radial (1 <= i <= n_radial)
    at n_angular equally spaced angles, plus 0 when ``include_center`` is set.
    ``refined()`` doubles both counts, so refinements are nested.
    """
    n_radial: int
    n_angular: int
    max_radius: float
    include_center: bool = True

    def __post_init__(self):
        if not 0.0 < self.max_radius < 1.0:
            raise DomainViolation(f"Grid max_radius must lie in (0, 1), got {self.max_radius}")
        if self.n_radial < 1 or self.n_angular < 1:
            raise ValueError(f"Grid counts must be >= 1, got {self.n_radial}x{self.n_angular}")

    def coordinate_samples(self) -> np.ndarray:
        return self.max_radius * disc_offsets(self.n_radial, self.n_angular, self.include_center)

    def points(self):
        c = self.coordinate_samples()
        z1, z2 = np.meshgrid(c, c, indexing='ij')
        return z1.ravel(), z2.ravel()

    def iter_points(self) -> Iterator[BidiscPoint]:
        z1, z2 = self.points()
        for a, b in zip(z1, z2):
            yield BidiscPoint(a, b)

    def refined(self) -> 'PolarGrid':
        return replace(self, n_radial=2 * self.n_radial, n_angular=2 * self.n_angular)

    def __len__(self) -> int:
        return len(self.coordinate_samples()) ** 2

    def describe(self) -> Dict[str, Any]:
        return {'kind': 'polar', 'n_radial': self.n_radial, 'n_angular': self.n_angular,
                'max_radius': self.max_radius, 'include_center': self.include_center,
                'points': len(self)}


@dataclass(frozen=True)
class PointGrid:
    """An explicit list of bidisc points."""
    members: Tuple[BidiscPoint, ...]

    @classmethod
    def single(cls, point: BidiscPoint) -> 'PointGrid':
        return cls((point,))

    @classmethod
    def product(cls, coords1, coords2) -> 'PointGrid':
        return cls(tuple(BidiscPoint(a, b) for a in coords1 for b in coords2))

    def points(self):
        z1 = np.array([p.z1 for p in self.members], dtype=complex)
        z2 = np.array([p.z2 for p in self.members], dtype=complex)
        return z1, z2

    def iter_points(self) -> Iterator[BidiscPoint]:
        return iter(self.members)

    def refined(self) -> 'PointGrid':
        return self

    def __len__(self) -> int:
        return len(self.members)

    def describe(self) -> Dict[str, Any]:
        return {'kind': 'points', 'points': len(self.members)}


# --- functions --------------------------------------------------------------

class FunctionKind(str, Enum):
    CLOSED_FORM = 'closed_form'
    FINITE_COEFFS = 'finite_coeffs'
    BLACK_BOX = 'black_box'


@dataclass(frozen=True, eq=False)
class AnalyticFunction:
    """An analytic function on the bidisc in one of three representations.

    Args:
        kind: closed form family, polynomial coefficient table at the origin,
            or a black-box evaluator.
        label: human readable name used in reports.
        family: the closed-form family object (see ``lindex.families``).
        coeffs: complex array c[j1, j2] of a polynomial sum c[j1, j2] z1^j1 z2^j2.
        evaluator: callable taking two complex numpy arrays.
        factor: constant multiplier applied to every representation.
    """
    kind: FunctionKind
    label: str
    family: Any = None
    coeffs: Optional[np.ndarray] = None
    evaluator: Optional[Callable] = None
    factor: complex = 1.0

    @classmethod
    def closed_form(cls, family, label: Optional[str] = None) -> 'AnalyticFunction':
        return cls(FunctionKind.CLOSED_FORM, label or family.name, family=family)

    @classmethod
    def polynomial(cls, coeffs, label: str = 'poly') -> 'AnalyticFunction':
        c = np.array(coeffs, dtype=complex)
        if c.ndim != 2:
            raise ValueError(f"Polynomial coefficients must be a 2-D array, got shape {c.shape}")
        return cls(FunctionKind.FINITE_COEFFS, label, coeffs=c)

    @classmethod
    def black_box(cls, evaluator: Callable, label: str = 'black_box',
                  vectorize: bool = False) -> 'AnalyticFunction':
        fn = np.vectorize(evaluator, otypes=[complex]) if vectorize else evaluator
        return cls(FunctionKind.BLACK_BOX, label, evaluator=fn)

    @property
    def has_exact_derivatives(self) -> bool:
        return self.kind is not FunctionKind.BLACK_BOX

    def scaled(self, lam: complex) -> 'AnalyticFunction':
        if lam == 0:
            raise DomainViolation("Scaling factor must be nonzero")
        return replace(self, factor=self.factor * lam)

    def evaluate(self, z1, z2) -> np.ndarray:
        z1 = np.asarray(z1, dtype=complex)
        z2 = np.asarray(z2, dtype=complex)
        if self.kind is FunctionKind.CLOSED_FORM:
            vals = self.family.evaluate(z1, z2)
        elif self.kind is FunctionKind.FINITE_COEFFS:
            vals = npoly.polyval2d(z1, z2, self.coeffs)
        else:
            try:
                vals = self.evaluator(z1, z2)
            except Exception as e:
                raise EvaluatorFailure(f"Evaluator {self.label!r} raised: {e}") from e
        vals = np.broadcast_to(np.asarray(vals, dtype=complex), np.broadcast(z1, z2).shape)
        vals = self.factor * vals
        if not np.all(np.isfinite(vals)):
            bad = np.argwhere(~np.isfinite(vals))[0]
            raise EvaluatorFailure(
                f"{self.label!r} is not finite at z=({np.broadcast_to(z1, vals.shape)[tuple(bad)]}, "
                f"{np.broadcast_to(z2, vals.shape)[tuple(bad)]})")
        return vals

    def log_evaluate(self, z1, z2) -> np.ndarray:
        """log F with real part log|F| (-inf at zeros); the branch of the imaginary part is arbitrary.

        Closed-form families with an exponential structure return the exponent
        directly, so magnitudes far beyond the double range stay representable.
        """
        if self.kind is FunctionKind.CLOSED_FORM and hasattr(self.family, 'log_evaluate'):
            z1 = np.asarray(z1, dtype=complex)
            z2 = np.asarray(z2, dtype=complex)
            out = np.asarray(self.family.log_evaluate(z1, z2), dtype=complex) + np.log(complex(self.factor))
            if np.any(np.isnan(out)) or np.any(np.isposinf(out.real)):
                raise EvaluatorFailure(f"{self.label!r} has a non-finite logarithm on the sample set")
            return out
        vals = self.evaluate(z1, z2)
        with np.errstate(divide='ignore', invalid='ignore'):
            return np.log(vals)

    def log_abs(self, z1, z2) -> np.ndarray:
        return self.log_evaluate(z1, z2).real

    def describe(self) -> Dict[str, Any]:
        return {'label': self.label, 'kind': self.kind.value}
