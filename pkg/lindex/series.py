"""Bivariate power series truncated at a total degree.

The series built by ``TruncatedSeries(c, order)`` represents::

    sum c[j1, j2] * w1**j1 * w2**j2     over j1 + j2 <= order

Coefficients of total degree above ``order`` are dropped by every operation.
Arithmetic mirrors ordinary numbers: ``+``, ``-``, ``*`` with series or
scalars, and ``exp_shifted()`` for the exponential of a series.
"""
from __future__ import annotations

from math import factorial
from typing import NamedTuple, Sequence

import numpy as np
from scipy.signal import convolve2d
from scipy.special import comb

from lindex.domain import degree_mask


class ScaledSeries(NamedTuple):
    """Taylor data b_K = exp(log_prefactor) * coeffs[K] / scale^K."""
    log_prefactor: complex
    coeffs: np.ndarray
    scale: tuple


class TruncatedSeries:
    """Bivariate power series truncated at total degree ``order``.

    :param c: 2-D coefficient array (padded or truncated to the simplex).
    :param order: highest total degree kept.
    """

    def __init__(self, c, order: int):
        if order < 0:
            raise ValueError(f"order cannot be less than zero: order = {order}")
        c = np.asarray(c, dtype=complex)
        if c.ndim == 0:
            c = c.reshape(1, 1)
        out = np.zeros((order + 1, order + 1), dtype=complex)
        n1 = min(c.shape[0], order + 1)
        n2 = min(c.shape[1], order + 1)
        out[:n1, :n2] = c[:n1, :n2]
        out[~degree_mask(order)] = 0.0
        self.c = out
        self.order = order

    @classmethod
    def constant(cls, value: complex, order: int) -> 'TruncatedSeries':
        return cls(np.array([[value]]), order)

    @classmethod
    def variable(cls, axis: int, order: int) -> 'TruncatedSeries':
        """The coordinate w1 (axis 0) or w2 (axis 1)."""
        c = np.zeros((2, 2), dtype=complex)
        c[(1, 0) if axis == 0 else (0, 1)] = 1.0
        return cls(c, order)

    @classmethod
    def univariate(cls, coeffs: Sequence[complex], axis: int, order: int) -> 'TruncatedSeries':
        coeffs = np.asarray(coeffs, dtype=complex)
        c = coeffs.reshape(-1, 1) if axis == 0 else coeffs.reshape(1, -1)
        return cls(c, order)

    def __getitem__(self, key):
        return self.c[key]

    def __add__(self, x):
        if isinstance(x, TruncatedSeries):
            order = min(self.order, x.order)
            return TruncatedSeries(self.c[:order + 1, :order + 1] + x.c[:order + 1, :order + 1], order)
        ans = self.c.copy()
        ans[0, 0] += x
        return TruncatedSeries(ans, self.order)

    def __radd__(self, x):
        return self + x

    def __neg__(self):
        return TruncatedSeries(-self.c, self.order)

    def __sub__(self, x):
        return self + (-x)

    def __rsub__(self, x):
        return -self + x

    def __mul__(self, x):
        if isinstance(x, TruncatedSeries):
            order = min(self.order, x.order)
            ans = convolve2d(self.c[:order + 1, :order + 1], x.c[:order + 1, :order + 1])
            return TruncatedSeries(ans, order)
        return TruncatedSeries(x * self.c, self.order)

    def __rmul__(self, x):
        return self * x

    def exp_shifted(self) -> ScaledSeries:
        """exp(self) split as exp(c00) times a series with unit constant term."""
        c0 = self.c[0, 0]
        x = self - c0
        ans = TruncatedSeries.constant(1.0, self.order)
        for n in range(self.order, 0, -1):
            ans = 1.0 + x * ans * (1.0 / n)
        return ScaledSeries(c0, ans.c, (1.0, 1.0))


def geometric_coeffs(pole: complex, center: complex, order: int, unit_scale: bool = True) -> np.ndarray:
    """Taylor coefficients of 1/(pole - z) at ``center`` in the variable t = w/|pole - center|.

    With ``unit_scale`` the coefficients are (pole-center)^-1 * u^j with |u| = 1.
    """
    delta = pole - center
    j = np.arange(order + 1)
    if unit_scale:
        return (abs(delta) / delta) ** j / delta
    return delta ** (-(j + 1.0))


def recenter(coeffs: np.ndarray, center: tuple, order: int) -> np.ndarray:
    """Binomial re-centering of sum c[j1,j2] z^J to sum b[m1,m2] (z - center)^M, truncated at ``order``.

    b[m1, m2] = sum_{j >= m} c[j1, j2] C(j1, m1) C(j2, m2) a1^(j1-m1) a2^(j2-m2).
    """
    c = np.asarray(coeffs, dtype=complex)
    a1, a2 = center
    t1 = _shift_matrix(a1, c.shape[0])
    t2 = _shift_matrix(a2, c.shape[1])
    b = t1 @ c @ t2.T
    return TruncatedSeries(b, order).c


def _shift_matrix(a: complex, n: int) -> np.ndarray:
    m = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    power = np.where(j >= m, j - m, 0)
    with np.errstate(invalid='ignore'):
        t = comb(j, m) * np.power(complex(a), power)
    return np.where(j >= m, t, 0.0)


def exp_linear_coeffs(alpha: tuple, order: int) -> np.ndarray:
    """Coefficients alpha1^j1 alpha2^j2 / (j1! j2!) of exp(alpha1 w1 + alpha2 w2)."""
    j = np.arange(order + 1)
    inv_fact = np.array([1.0 / factorial(int(k)) for k in j])
    u1 = complex(alpha[0]) ** j * inv_fact
    u2 = complex(alpha[1]) ** j * inv_fact
    return TruncatedSeries(np.outer(u1, u2), order).c
