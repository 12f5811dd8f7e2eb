"""Truncated Taylor coefficient tables and normalized derivative tables.

Tables come from exact family rules, from binomial re-centering of a
polynomial, or from Cauchy extraction: F sampled on the torus
|z_j - z0_j| = rho_j and transformed with a 2-D FFT, which yields
b_K rho^K up to aliasing from degrees beyond the sample count.

Magnitudes are held as natural logs (-inf for zero) with a separate phase.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd
from numpy.polynomial import polynomial as npoly
from scipy import fft as sfft

from config.load_config import get_config
from lindex.domain import (
    LOG_ZERO, AnalyticFunction, BidiscPoint, FunctionKind, LogMagnitude, MultiIndex, Radii,
    degree_enumerate, degree_mask, log_abs_array, skeleton_samples, total_degree,
)
from lindex.errors import AliasWarning, DomainViolation, SkeletonOutsideDomain, UnsupportedFamily
from lindex.series import ScaledSeries, recenter

logger = logging.getLogger(__name__)

CSV_COLUMNS = ['j1', 'j2', 'log_abs', 'phase']


def band_ratio(log_terms: np.ndarray, order: int) -> float:
    """max over the top degree band divided by the overall max, from log terms."""
    if order < 0:
        return 0.0
    deg = total_degree(order)
    masked = np.where(deg <= order, log_terms, LOG_ZERO)
    overall = masked.max()
    if overall == LOG_ZERO:
        return 0.0
    top = np.where(deg == order, masked, LOG_ZERO).max()
    return float(math.exp(top - overall)) if top > LOG_ZERO else 0.0


def _exponent_grid(order: int) -> Tuple[np.ndarray, np.ndarray]:
    j = np.arange(order + 1, dtype=float)
    return j[:, None], j[None, :]


@dataclass(frozen=True, eq=False)
class CoeffTable:
    """Taylor coefficients b_K = F^(K)(z0) / (k1! k2!) for ||K|| <= order.

    ``log_abs`` and ``phase`` are (order+1, order+1) arrays; entries outside
    the degree simplex are -inf.
    """
    center: BidiscPoint
    order: int
    log_abs: np.ndarray
    phase: np.ndarray
    extraction_radii: Optional[Radii] = None
    tail_indicator: float = 0.0
    method: str = 'closed_form'

    @classmethod
    def from_scaled(cls, center: BidiscPoint, series: ScaledSeries, order: int,
                    method: str = 'closed_form') -> 'CoeffTable':
        lp = complex(series.log_prefactor)
        j1, j2 = _exponent_grid(order)
        coeffs = np.asarray(series.coeffs)[:order + 1, :order + 1]
        log_abs = lp.real + log_abs_array(coeffs) - j1 * math.log(series.scale[0]) - j2 * math.log(series.scale[1])
        phase = np.angle(np.exp(1j * (lp.imag + np.angle(coeffs))))
        return cls._build(center, order, log_abs, phase, None, method)

    @classmethod
    def from_complex(cls, center: BidiscPoint, values, order: int, extraction_radii: Optional[Radii] = None,
                     method: str = 'closed_form') -> 'CoeffTable':
        v = np.zeros((order + 1, order + 1), dtype=complex)
        src = np.asarray(values, dtype=complex)
        n1, n2 = min(src.shape[0], order + 1), min(src.shape[1], order + 1)
        v[:n1, :n2] = src[:n1, :n2]
        return cls._build(center, order, log_abs_array(v), np.angle(v), extraction_radii, method)

    @classmethod
    def _build(cls, center, order, log_abs, phase, extraction_radii, method, tail=None) -> 'CoeffTable':
        mask = degree_mask(order)
        log_abs = np.where(mask, log_abs, LOG_ZERO)
        phase = np.where(mask & np.isfinite(log_abs), phase, 0.0)
        if tail is None:
            rho = extraction_radii or default_extraction_radii(center)
            j1, j2 = _exponent_grid(order)
            tail = band_ratio(log_abs + j1 * math.log(rho.r1) + j2 * math.log(rho.r2), order)
        return cls(center, order, log_abs, phase, extraction_radii, tail, method)

    def entry(self, k1: int, k2: int) -> LogMagnitude:
        return LogMagnitude(float(self.log_abs[k1, k2]), float(self.phase[k1, k2]))

    @property
    def entries(self) -> Dict[MultiIndex, LogMagnitude]:
        return {K: self.entry(*K) for K in degree_enumerate(self.order)}

    def values(self) -> np.ndarray:
        with np.errstate(over='ignore'):
            return np.exp(self.log_abs + 1j * self.phase)

    def to_frame(self) -> pd.DataFrame:
        rows = [(K.k1, K.k2, float(self.log_abs[K]), float(self.phase[K])) for K in degree_enumerate(self.order)]
        return pd.DataFrame(rows, columns=CSV_COLUMNS)


def default_extraction_radii(z0: BidiscPoint) -> Radii:
    """rho_j = min(fraction * (1 - |z0_j|), cap)."""
    cfg = get_config()
    frac = float(cfg['extraction_radius_fraction'])
    cap = float(cfg['extraction_radius_cap'])
    return Radii(min(frac * (1.0 - abs(z0.z1)), cap), min(frac * (1.0 - abs(z0.z2)), cap))


def default_sample_count(order: int) -> int:
    n = max(int(get_config()['min_cauchy_samples']), 4 * order)
    return 1 << (n - 1).bit_length()


def taylor_closed_form(F: AnalyticFunction, z0: BidiscPoint, order: int) -> CoeffTable:
    """Exact coefficients from a family rule or by re-centering a polynomial."""
    if F.kind is FunctionKind.FINITE_COEFFS:
        b = recenter(F.coeffs * F.factor, (z0.z1, z0.z2), order)
        return CoeffTable.from_complex(z0, b, order, method='recentered')
    if F.kind is FunctionKind.CLOSED_FORM and hasattr(F.family, 'taylor'):
        series = F.family.taylor(z0, order)
        lp = complex(series.log_prefactor) + np.log(complex(F.factor))
        return CoeffTable.from_scaled(z0, series._replace(log_prefactor=lp), order)
    raise UnsupportedFamily(f"{F.label!r} has no exact derivative rule")


def taylor_cauchy(F: AnalyticFunction, z0: BidiscPoint, rho: Optional[Radii] = None,
                  n_samples: Optional[int] = None, order: int = 8, method: str = 'fft') -> CoeffTable:
    """Coefficients from the discrete Cauchy integral over the skeleton T^2(z0, rho).

    Args:
        F: any function representation; only point evaluation is used.
        z0: expansion point.
        rho: skeleton radii, default ``default_extraction_radii(z0)``.
        n_samples: samples per axis, a power of two and at least 4 * order.
        order: maximal total degree kept.
        method: 'fft' or 'dft' (direct transform, same result to rounding).

    Returns:
        CoeffTable with ``tail_indicator`` = max_{||K||=order} |b_K| rho^K over
        max_{||K||<=order} |b_K| rho^K; an AliasWarning is issued when it
        exceeds ``alias_threshold``.
    """
    cfg = get_config()
    rho = rho or default_extraction_radii(z0)
    if abs(z0.z1) + rho.r1 >= 1.0 or abs(z0.z2) + rho.r2 >= 1.0:
        raise SkeletonOutsideDomain(
            f"Skeleton around ({z0.z1}, {z0.z2}) with radii ({rho.r1}, {rho.r2}) leaves the bidisc")
    n = n_samples or default_sample_count(order)
    if n & (n - 1) or n < 4 * order:
        raise DomainViolation(f"n_samples must be a power of two >= 4*order, got {n} for order {order}")

    z1, z2 = skeleton_samples(z0, rho, n)
    logv = F.log_evaluate(z1, z2)
    finite = np.isfinite(logv.real)
    j1, j2 = _exponent_grid(order)
    if not finite.any():
        log_abs = np.full((order + 1, order + 1), LOG_ZERO)
        return CoeffTable._build(z0, order, log_abs, np.zeros_like(log_abs), rho, 'cauchy', tail=0.0)
    shift = float(logv.real[finite].max())
    v = np.where(finite, np.exp(np.where(finite, logv, 0) - shift), 0.0)

    if method == 'fft':
        spectrum = sfft.fft2(v)[:order + 1, :order + 1] / (n * n)
    elif method == 'dft':
        w = np.exp(-2j * np.pi * np.outer(np.arange(order + 1), np.arange(n)) / n)
        spectrum = (w @ v @ w.T) / (n * n)
    else:
        raise ValueError(f"Unknown transform method {method!r}")
    spectrum = np.where(np.abs(spectrum) <= float(cfg['cauchy_noise_floor']), 0.0, spectrum)

    log_terms = np.where(degree_mask(order), log_abs_array(spectrum) + shift, LOG_ZERO)
    tail = band_ratio(log_terms, order)
    log_abs = log_terms - j1 * math.log(rho.r1) - j2 * math.log(rho.r2)
    table = CoeffTable._build(z0, order, log_abs, np.angle(spectrum), rho, 'cauchy', tail=tail)

    threshold = float(cfg['alias_threshold'])
    if tail > threshold:
        logger.warning(f"Cauchy extraction of {F.label!r} at ({z0.z1}, {z0.z2}): "
                       f"tail indicator {tail:.3g} exceeds {threshold:.1g}")
        warnings.warn(f"tail indicator {tail:.3g} exceeds alias threshold {threshold:.1g}", AliasWarning,
                      stacklevel=2)
    return table


def expand(F: AnalyticFunction, z0: BidiscPoint, order: int, rho: Optional[Radii] = None) -> CoeffTable:
    """Exact table when F has derivative rules, Cauchy extraction otherwise."""
    if F.has_exact_derivatives and rho is None:
        return taylor_closed_form(F, z0, order)
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', AliasWarning)
        return taylor_cauchy(F, z0, rho=rho, order=order)


# --- normalized derivatives -------------------------------------------------

@dataclass(frozen=True, eq=False)
class NormDerivGrid:
    """log a*_K = log |b_K| - k1 log l1(z0) - k2 log l2(z0)."""
    center: BidiscPoint
    order: int
    log_values: np.ndarray
    weight_at_center: Tuple[float, float]
    source: Optional[CoeffTable] = None

    @property
    def values(self) -> Dict[MultiIndex, LogMagnitude]:
        return {K: LogMagnitude(float(self.log_values[K])) for K in degree_enumerate(self.order)}

    @property
    def tail_indicator(self) -> float:
        return band_ratio(self.log_values, self.order)

    def band_max(self) -> np.ndarray:
        return diagonal_max(self)


def normalize(coeffs: CoeffTable, L) -> NormDerivGrid:
    l1, l2 = L.at(coeffs.center)
    j1, j2 = _exponent_grid(coeffs.order)
    log_values = coeffs.log_abs - j1 * math.log(l1) - j2 * math.log(l2)
    return NormDerivGrid(coeffs.center, coeffs.order, log_values, (l1, l2), coeffs)


def diagonal_max(grid: NormDerivGrid) -> np.ndarray:
    """a_k = max{a*_{j1,j2} : j1 + j2 = k} in log-domain, k = 0..order."""
    deg = total_degree(grid.order)
    return np.array([np.where(deg == k, grid.log_values, LOG_ZERO).max() for k in range(grid.order + 1)])


def eval_series(coeffs: CoeffTable, z: BidiscPoint) -> complex:
    """Sum of the truncated series at z."""
    w1, w2 = z.z1 - coeffs.center.z1, z.z2 - coeffs.center.z2
    rho = coeffs.extraction_radii
    if rho is not None and (abs(w1) > rho.r1 or abs(w2) > rho.r2):
        logger.debug(f"eval_series at ({z.z1}, {z.z2}) lies outside the extraction polydisc")
    finite = np.isfinite(coeffs.log_abs)
    if not finite.any():
        return 0j
    shift = float(coeffs.log_abs[finite].max())
    c = np.where(finite, np.exp(np.where(finite, coeffs.log_abs, 0.0) - shift + 1j * coeffs.phase), 0.0)
    return complex(math.exp(shift) * npoly.polyval2d(w1, w2, c))


def coeffs_from_frame(frame: pd.DataFrame, label: str = 'poly') -> AnalyticFunction:
    """Re-ingest a dumped table as a polynomial in z (the table is read as centered at the origin)."""
    missing = set(CSV_COLUMNS) - set(frame.columns)
    if missing:
        raise ValueError(f"Coefficient frame lacks columns {sorted(missing)}")
    deg = int(max(frame['j1'].max(), frame['j2'].max()))
    c = np.zeros((deg + 1, deg + 1), dtype=complex)
    for row in frame.itertuples(index=False):
        if np.isfinite(row.log_abs):
            c[int(row.j1), int(row.j2)] = np.exp(row.log_abs + 1j * row.phase)
    return AnalyticFunction.polynomial(c, label=label)


__all__ = [
    'CoeffTable', 'NormDerivGrid', 'band_ratio', 'default_extraction_radii', 'default_sample_count',
    'taylor_closed_form', 'taylor_cauchy', 'expand', 'normalize', 'diagonal_max', 'eval_series',
    'coeffs_from_frame', 'CSV_COLUMNS',
]
