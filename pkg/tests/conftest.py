import sys, os
# Ensure project root is on path for package imports
ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

import numpy as np
import pytest

from lindex.domain import AnalyticFunction
from lindex.weights import WeightField

SPECS = os.path.join(ROOT, 'data', 'specs')


def random_polynomial(rng, degree, label='poly'):
    """Complex Gaussian coefficients on the total-degree simplex."""
    c = rng.normal(size=(degree + 1, degree + 1)) + 1j * rng.normal(size=(degree + 1, degree + 1))
    j = np.arange(degree + 1)
    c[(j[:, None] + j[None, :]) > degree] = 0.0
    return AnalyticFunction.polynomial(c, label=label)


@pytest.fixture
def specs_dir():
    return SPECS


@pytest.fixture
def wide_weight():
    return WeightField.constant(8.0, 8.0, beta=2.0)


@pytest.fixture
def unit_weight():
    return WeightField.constant(1.0, 1.0, beta=2.0)


@pytest.fixture(scope='session')
def golden_corpus():
    rng = np.random.default_rng(42)
    return [random_polynomial(rng, int(rng.integers(1, 5)), label=f'golden_{i}') for i in range(20)]
