"""Closed-form constants attached to the boundedness criteria.

Every constant is computed in log-domain; factorials go through log-gamma.
"""
from __future__ import annotations

import math
from typing import Tuple, Union

import numpy as np
from scipy.special import gammaln

from lindex.domain import LogMagnitude, Radii
from lindex.errors import DomainViolation
from lindex.index import _lambda_pairs, q_constant


def _as_log(x: Union[float, LogMagnitude]) -> float:
    if isinstance(x, LogMagnitude):
        return x.log_abs
    if x <= 0:
        raise DomainViolation(f"Expected a positive magnitude, got {x}")
    return math.log(x)


def main_poly_log_c(N: int) -> float:
    """log c for c = 2((N+1)^3 + 6 (N+3)!)."""
    if N < 0:
        raise DomainViolation(f"N must be >= 0, got {N}")
    return math.log(2.0) + float(np.logaddexp(3.0 * math.log(N + 1), math.log(6.0) + gammaln(N + 4)))


def main_polynomial_window(N: int, d: float) -> Tuple[LogMagnitude, LogMagnitude]:
    """(eta(d), d) with eta(d) = d / ((d+1) c^(2(N+1))); a main polynomial exists for some r inside."""
    if not d > 0:
        raise DomainViolation(f"d must be positive, got {d}")
    log_eta = math.log(d) - math.log(d + 1.0) - 2 * (N + 1) * main_poly_log_c(N)
    return LogMagnitude(log_eta), LogMagnitude(math.log(d))


def local_dominance_witness(N: int, R: Radii, lambdas) -> LogMagnitude:
    """p0 = (2 prod_j lambda1_j^-N lambda2_j^N)^q with q = q_constant(N, R, lambdas)."""
    lam1, lam2 = _lambda_pairs(lambdas)
    q = q_constant(N, R, lambdas)
    base = math.log(2.0) + sum(-N * math.log(lo) + N * math.log(hi) for lo, hi in zip(lam1, lam2))
    return LogMagnitude(q * base)


def kth_modulus_necessity_constant(p0: Union[float, LogMagnitude], n0: int, lambdas) -> LogMagnitude:
    """p = p0 (lambda2_1 lambda2_2)^n0."""
    _, lam2 = _lambda_pairs(lambdas)
    return LogMagnitude(_as_log(p0) + n0 * sum(math.log(hi) for hi in lam2))


def sufficiency_exponent(p: float, beta: float) -> int:
    """Least integer s0 >= 0 with p / beta^s0 <= 1."""
    if beta <= 1:
        raise DomainViolation(f"beta must exceed 1, got {beta}")
    if p <= 1:
        return 0
    s0 = max(0, math.ceil(math.log(p) / math.log(beta)))
    while s0 > 0 and p <= beta ** (s0 - 1):
        s0 -= 1
    while p > beta ** s0:
        s0 += 1
    return s0


def index_upper_bound(s0: int, n0: int) -> int:
    """Index bound s0 + n0 delivered by the derivative max-modulus criteria."""
    return s0 + n0


def tail_dominance_constant(theta: Tuple[float, float], beta: float) -> float:
    """c = theta1 theta2 / ((1 - theta1)(1 - theta2)), valid for 1/beta < theta_j < 1."""
    for t in theta:
        if not (1.0 / beta < t < 1.0):
            raise DomainViolation(f"theta must lie in (1/beta, 1) = ({1.0 / beta}, 1), got {t}")
    return (theta[0] * theta[1]) / ((1.0 - theta[0]) * (1.0 - theta[1]))


def hayman_sufficiency_constant(p: int, eta: Union[float, LogMagnitude]) -> LogMagnitude:
    """((p+1)! / eta^(p+1))^2."""
    return LogMagnitude(2.0 * (float(gammaln(p + 2)) - (p + 1) * _as_log(eta)))


__all__ = [
    'main_poly_log_c', 'main_polynomial_window', 'local_dominance_witness',
    'kth_modulus_necessity_constant', 'sufficiency_exponent', 'index_upper_bound',
    'tail_dominance_constant', 'hayman_sufficiency_constant',
]
