"""Closed-form function families and the function spec format.

Each family knows how to evaluate itself on numpy arrays, how to return
log F (so huge exponentials stay in range) and how to produce its exact
Taylor expansion at any point of the bidisc as a ``ScaledSeries``.

Spec JSON::

    {"family": "exp_reciprocal"}
    {"family": "rational_geom"}
    {"family": "exp_linear", "alpha": [1, 1]}
    {"family": "rational_product", "shift": 2}
    {"family": "poly", "coeffs": [[j1, j2, re, im], ...]}

Any spec may add ``"scale": [re, im]`` (or a real number) to multiply F by a
constant, and ``"label"``.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np

from lindex.domain import AnalyticFunction, BidiscPoint, FunctionKind
from lindex.errors import SpecError
from lindex.series import ScaledSeries, TruncatedSeries, exp_linear_coeffs, geometric_coeffs

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExpReciprocal:
    """F(z) = exp(1 / ((1 - z1)(1 - z2))), singular at the corner (1, 1)."""
    name: str = 'exp_reciprocal'

    def evaluate(self, z1, z2):
        with np.errstate(over='ignore'):
            return np.exp(self.log_evaluate(z1, z2))

    def log_evaluate(self, z1, z2):
        return 1.0 / ((1.0 - z1) * (1.0 - z2))

    def taylor(self, z0: BidiscPoint, order: int) -> ScaledSeries:
        u1 = geometric_coeffs(1.0, z0.z1, order)
        u2 = geometric_coeffs(1.0, z0.z2, order)
        inner = TruncatedSeries(np.outer(u1, u2), order)
        log_prefactor, coeffs, _ = inner.exp_shifted()
        return ScaledSeries(log_prefactor, coeffs, (abs(1.0 - z0.z1), abs(1.0 - z0.z2)))

    def params(self) -> Dict[str, Any]:
        return {}


@dataclass(frozen=True)
class RationalGeom:
    """F(z) = 1 / (1 - z1 z2)."""
    name: str = 'rational_geom'

    def evaluate(self, z1, z2):
        return 1.0 / (1.0 - z1 * z2)

    def log_evaluate(self, z1, z2):
        return -np.log(1.0 - z1 * z2)

    def taylor(self, z0: BidiscPoint, order: int) -> ScaledSeries:
        a1, a2 = z0.z1, z0.z2
        denom = 1.0 - a1 * a2
        w1 = TruncatedSeries.variable(0, order)
        w2 = TruncatedSeries.variable(1, order)
        u = (a2 * w1 + a1 * w2 + w1 * w2) * (1.0 / denom)
        ans = TruncatedSeries.constant(1.0, order)
        for _ in range(order):
            ans = 1.0 + u * ans
        return ScaledSeries(-np.log(complex(denom)), ans.c, (1.0, 1.0))

    def params(self) -> Dict[str, Any]:
        return {}


@dataclass(frozen=True)
class ExpLinear:
    """F(z) = exp(alpha1 z1 + alpha2 z2); entire."""
    alpha: Tuple[complex, complex] = (1.0, 1.0)
    name: str = 'exp_linear'

    def evaluate(self, z1, z2):
        return np.exp(self.log_evaluate(z1, z2))

    def log_evaluate(self, z1, z2):
        return self.alpha[0] * z1 + self.alpha[1] * z2

    def taylor(self, z0: BidiscPoint, order: int) -> ScaledSeries:
        lp = complex(self.alpha[0] * z0.z1 + self.alpha[1] * z0.z2)
        return ScaledSeries(lp, exp_linear_coeffs(self.alpha, order), (1.0, 1.0))

    def params(self) -> Dict[str, Any]:
        return {'alpha': [_complex_to_json(a) for a in self.alpha]}


@dataclass(frozen=True)
class RationalProduct:
    """F(z) = 1 / ((s - z1)(s - z2)) with |s| >= 1."""
    shift: complex = 2.0
    name: str = 'rational_product'

    def evaluate(self, z1, z2):
        return 1.0 / ((self.shift - z1) * (self.shift - z2))

    def log_evaluate(self, z1, z2):
        return -np.log(self.shift - z1) - np.log(self.shift - z2)

    def taylor(self, z0: BidiscPoint, order: int) -> ScaledSeries:
        u1 = geometric_coeffs(self.shift, z0.z1, order)
        u2 = geometric_coeffs(self.shift, z0.z2, order)
        coeffs = TruncatedSeries(np.outer(u1, u2), order).c
        return ScaledSeries(0j, coeffs, (abs(self.shift - z0.z1), abs(self.shift - z0.z2)))

    def params(self) -> Dict[str, Any]:
        return {'shift': _complex_to_json(self.shift)}


FAMILIES = {
    'exp_reciprocal': ExpReciprocal,
    'rational_geom': RationalGeom,
    'exp_linear': ExpLinear,
    'rational_product': RationalProduct,
}


def _complex_to_json(x: complex) -> Union[float, list]:
    x = complex(x)
    return x.real if x.imag == 0 else [x.real, x.imag]


def _parse_complex(value: Any, what: str) -> complex:
    try:
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ValueError
            return complex(float(value[0]), float(value[1]))
        return complex(float(value))
    except (TypeError, ValueError):
        raise SpecError(f"{what} must be a number or [re, im], got {value!r}")


def poly_from_terms(terms, label: str = 'poly') -> AnalyticFunction:
    """Build a FiniteCoeffs function from [[j1, j2, re, im], ...] (im optional)."""
    if not terms:
        raise SpecError("poly spec needs a non-empty 'coeffs' list")
    parsed = []
    for term in terms:
        if not isinstance(term, (list, tuple)) or len(term) not in (3, 4):
            raise SpecError(f"poly term must be [j1, j2, re, im], got {term!r}")
        j1, j2 = int(term[0]), int(term[1])
        if j1 < 0 or j2 < 0:
            raise SpecError(f"poly exponents must be non-negative, got {term!r}")
        im = float(term[3]) if len(term) == 4 else 0.0
        parsed.append((j1, j2, complex(float(term[2]), im)))
    deg = max(max(j1, j2) for j1, j2, _ in parsed)
    coeffs = np.zeros((deg + 1, deg + 1), dtype=complex)
    for j1, j2, c in parsed:
        coeffs[j1, j2] += c
    return AnalyticFunction.polynomial(coeffs, label=label)


def function_from_spec(spec: Dict[str, Any]) -> AnalyticFunction:
    if not isinstance(spec, dict) or 'family' not in spec:
        raise SpecError("function spec must be an object with a 'family' key")
    family = spec['family']
    label = spec.get('label', family)
    if family == 'poly':
        fn = poly_from_terms(spec.get('coeffs'), label=label)
    elif family == 'exp_linear':
        alpha = spec.get('alpha', [1.0, 1.0])
        if not isinstance(alpha, (list, tuple)) or len(alpha) != 2:
            raise SpecError(f"exp_linear alpha must have two entries, got {alpha!r}")
        fn = AnalyticFunction.closed_form(
            ExpLinear(alpha=tuple(_parse_complex(a, 'alpha') for a in alpha)), label=label)
    elif family == 'rational_product':
        shift = _parse_complex(spec.get('shift', 2.0), 'shift')
        if abs(shift) < 1.0:
            raise SpecError(f"rational_product shift must satisfy |s| >= 1, got {shift}")
        fn = AnalyticFunction.closed_form(RationalProduct(shift=shift), label=label)
    elif family in FAMILIES:
        fn = AnalyticFunction.closed_form(FAMILIES[family](), label=label)
    else:
        raise SpecError(f"Unknown function family {family!r}")
    if 'scale' in spec:
        lam = _parse_complex(spec['scale'], 'scale')
        if lam == 0:
            raise SpecError("scale must be nonzero")
        fn = fn.scaled(lam)
    return fn


def function_to_spec(fn: AnalyticFunction) -> Dict[str, Any]:
    if fn.kind is FunctionKind.FINITE_COEFFS:
        terms = [[int(j1), int(j2), c.real, c.imag] for (j1, j2), c in np.ndenumerate(fn.coeffs) if c != 0]
        spec: Dict[str, Any] = {'family': 'poly', 'coeffs': terms}
    elif fn.kind is FunctionKind.CLOSED_FORM:
        spec = {'family': fn.family.name, **fn.family.params()}
    else:
        raise SpecError(f"Black-box function {fn.label!r} has no spec form")
    if fn.factor != 1:
        spec['scale'] = [complex(fn.factor).real, complex(fn.factor).imag]
    return spec


def load_function_spec(path: Union[str, Path]) -> AnalyticFunction:
    path = Path(path)
    try:
        spec = json.loads(path.read_text())
    except FileNotFoundError:
        raise SpecError(f"Function spec not found: {path}")
    except json.JSONDecodeError as e:
        raise SpecError(f"Function spec {path} is not valid JSON: {e}")
    fn = function_from_spec(spec)
    logger.debug(f"Loaded function {fn.label!r} ({fn.kind.value}) from {path}")
    return fn


def example1_function() -> AnalyticFunction:
    return AnalyticFunction.closed_form(ExpReciprocal(), label='exp_reciprocal')


__all__ = [
    'ExpReciprocal', 'RationalGeom', 'ExpLinear', 'RationalProduct', 'FAMILIES',
    'poly_from_terms', 'function_from_spec', 'function_to_spec', 'load_function_spec',
    'example1_function',
]
