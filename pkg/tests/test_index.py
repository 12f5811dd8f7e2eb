import cmath
import math
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_polynomial
from lindex.coefficients import expand, taylor_closed_form
from lindex.domain import BidiscPoint, PointGrid, PolarGrid, Radii, Verdict
from lindex.errors import DomainViolation, NoNonzeroCoefficient, SkeletonOutsideDomain, TruncationUnsound
from lindex.families import example1_function, function_from_spec
from lindex.index import (
    PROFILE_COLUMNS, default_exhaustion, index_profile, local_index, max_modulus, maximal_term, q_constant,
)
from lindex.weights import WeightField, example1_weight

ORIGIN = BidiscPoint.origin()


def _poly(*terms):
    return function_from_spec({'family': 'poly', 'coeffs': [list(t) for t in terms]})


def _oracle_index(F, L, z0, cap, tol=1e-9):
    """Definitional scan: re-center term by term, then test every prefix degree."""
    c = F.coeffs
    l1, l2 = L.at(z0)
    astar = {}
    for m1 in range(cap + 1):
        for m2 in range(cap + 1 - m1):
            b = 0j
            for j1 in range(m1, c.shape[0]):
                for j2 in range(m2, c.shape[1]):
                    b += c[j1, j2] * comb(j1, m1) * comb(j2, m2) * z0.z1 ** (j1 - m1) * z0.z2 ** (j2 - m2)
            astar[(m1, m2)] = abs(b) / (l1 ** m1 * l2 ** m2)
    overall = max(astar.values())
    for m in range(cap + 1):
        best = max(v for K, v in astar.items() if K[0] + K[1] <= m)
        if overall <= (1 + tol) * best:
            return m


def _random_point(rng, radius):
    r = radius * rng.uniform(0, 1, 2)
    t = rng.uniform(0, 2 * math.pi, 2)
    return BidiscPoint(r[0] * cmath.exp(1j * t[0]), r[1] * cmath.exp(1j * t[1]))


class TestLocalIndex:
    def test_constant_function(self):
        res = local_index(_poly((0, 0, 5.0)), WeightField.constant(2.0, 2.0), ORIGIN)
        assert res.n0 == 0
        assert res.argmax_index == (0, 0)
        assert res.conclusive
        assert res.slack == math.inf

    def test_first_coordinate(self):
        res = local_index(_poly((1, 0, 1.0)), WeightField.constant(2.0, 2.0), ORIGIN)
        assert res.n0 == 1
        assert res.argmax_index == (1, 0)
        assert res.dominating_value.value == pytest.approx(0.5)

    def test_example_function_away_from_origin(self):
        F, L = example1_function(), example1_weight()
        for z0 in (BidiscPoint(0.5, 0.5), BidiscPoint(0.3, -0.7j), BidiscPoint(0.9, 0.45)):
            res = local_index(F, L, z0, cap=12)
            assert res.conclusive, res.reason
            assert res.n0 == 0

    def test_truncation_at_origin(self):
        F, L = example1_function(), example1_weight()
        res = local_index(F, L, ORIGIN, cap=12)
        assert res.status is Verdict.INCONCLUSIVE
        assert res.reason.startswith('TruncationUnsound')
        with pytest.raises(TruncationUnsound):
            local_index(F, L, ORIGIN, cap=12, strict=True)

    def test_unbounded_within_cap(self):
        F = function_from_spec({'family': 'exp_linear'})
        res = local_index(F, WeightField.constant(0.1, 0.1), ORIGIN, cap=4)
        assert res.unbounded
        assert res.n0 is None
        assert res.status is Verdict.INCONCLUSIVE
        assert res.reason.startswith('Unbounded(4)')
        assert res.to_dict()['unbounded'] is True

    def test_invalid_parameters(self):
        with pytest.raises(DomainViolation):
            local_index(_poly((0, 0, 1.0)), WeightField.constant(2.0, 2.0), ORIGIN, cap=0)
        with pytest.raises(DomainViolation):
            local_index(_poly((0, 0, 1.0)), WeightField.constant(2.0, 2.0), ORIGIN, tol=-1.0)

    def test_matches_definitional_scan(self):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            F = random_polynomial(rng, int(rng.integers(0, 7)))
            L = WeightField.constant(*rng.uniform(0.5, 4.0, 2))
            z0 = _random_point(rng, 0.6)
            res = local_index(F, L, z0, cap=8)
            assert res.conclusive
            assert res.n0 == _oracle_index(F, L, z0, cap=8)

    @settings(max_examples=200, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1),
           t=st.floats(min_value=1.0, max_value=50.0))
    def test_larger_weight_never_raises_index(self, seed, t):
        rng = np.random.default_rng(seed)
        F = random_polynomial(rng, 4)
        L = WeightField.constant(*rng.uniform(0.5, 4.0, 2))
        z0 = _random_point(rng, 0.6)
        assert local_index(F, L.scaled_by(t), z0, cap=6).n0 <= local_index(F, L, z0, cap=6).n0

    @settings(max_examples=200, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1),
           log_scale=st.floats(min_value=-7.0, max_value=7.0),
           angle=st.floats(min_value=0.0, max_value=6.28))
    def test_invariant_under_constant_factor(self, seed, log_scale, angle):
        rng = np.random.default_rng(seed)
        F = random_polynomial(rng, 4)
        L = WeightField.constant(*rng.uniform(0.5, 4.0, 2))
        z0 = _random_point(rng, 0.6)
        lam = math.exp(log_scale) * cmath.exp(1j * angle)
        first, second = local_index(F, L, z0, cap=6), local_index(F.scaled(lam), L, z0, cap=6)
        assert first.n0 == second.n0
        assert first.argmax_index == second.argmax_index


class TestIndexProfile:
    def test_single_point(self):
        profile = index_profile(_poly((1, 1, 1.0)), WeightField.constant(10.0, 10.0),
                                [PointGrid.single(ORIGIN)])
        assert profile.sup == 2
        assert profile.sup_per_grid == [2]

    def test_constant_function_default_schedule(self):
        profile = index_profile(_poly((0, 0, 3.0)), WeightField.constant(2.0, 2.0))
        assert profile.sup_per_grid == [0, 0, 0, 0]
        assert profile.inconclusive_count == 0

    def test_example_function(self):
        grids = default_exhaustion([0.5, 0.7, 0.9])
        profile = index_profile(example1_function(), example1_weight(), grids, cap=12)
        assert profile.sup_per_grid == [0, 0, 0]
        assert profile.inconclusive_count <= 0.01 * len(profile.per_point)
        conclusive = [r for _, r in profile.per_point if r.conclusive]
        assert all(r.n0 == 0 for r in conclusive)

    def test_sup_is_cumulative(self):
        grids = [PolarGrid(1, 4, 0.3), PolarGrid(1, 4, 0.6), PolarGrid(1, 4, 0.9)]
        F = _poly((1, 0, 1.0), (0, 3, 2.0))
        profile = index_profile(F, WeightField.constant(1.5, 1.5), grids, cap=8)
        sups = profile.sup_per_grid
        assert None not in sups
        assert all(a <= b for a, b in zip(sups, sups[1:]))

    def test_inconclusive_points_do_not_count(self):
        profile = index_profile(example1_function(), example1_weight(), [PointGrid.single(ORIGIN)], cap=12)
        assert profile.sup is None
        assert profile.inconclusive_per_grid == [1]

    def test_frame(self):
        profile = index_profile(_poly((1, 0, 1.0)), WeightField.constant(2.0, 2.0), [PolarGrid(1, 2, 0.4)])
        frame = profile.to_frame()
        assert list(frame.columns) == PROFILE_COLUMNS
        assert len(frame) == 9
        assert set(frame['n0']) == {1}

    def test_worker_count_does_not_change_results(self, monkeypatch):
        F, L = example1_function(), example1_weight()
        grids = default_exhaustion([0.7])
        serial = index_profile(F, L, grids, cap=10, max_workers=1)
        monkeypatch.setenv('BINDEX_THREADS', '3')
        pooled = index_profile(F, L, grids, cap=10, max_workers=8)
        assert [r.n0 for _, r in serial.per_point] == [r.n0 for _, r in pooled.per_point]


class TestMaximalTerm:
    def test_monomial(self):
        res = maximal_term(expand(_poly((2, 1, 3.0)), ORIGIN, 3), Radii(0.5, 0.5))
        assert res.mu.value == pytest.approx(0.375)
        assert res.nu_set == [(2, 1)]
        assert res.nu_norm == 3

    def test_geometric(self):
        F = function_from_spec({'family': 'rational_geom'})
        res = maximal_term(expand(F, ORIGIN, 8), Radii(0.5, 0.5))
        assert res.mu.value == pytest.approx(1.0)
        assert res.nu_set == [(0, 0)]
        assert res.nu_norm == 0

    def test_tie_reports_all_maximizers(self):
        res = maximal_term(expand(_poly((0, 0, 1.0), (1, 0, 2.0)), ORIGIN, 2), Radii(0.5, 0.3))
        assert res.nu_set == [(0, 0), (1, 0)]
        assert res.nu_norm == 1

    def test_all_zero(self):
        with pytest.raises(NoNonzeroCoefficient):
            maximal_term(expand(_poly((0, 0, 0.0)), ORIGIN, 2), Radii(0.5, 0.5))

    @settings(max_examples=200, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_brute_force_and_ray_monotonicity(self, seed):
        rng = np.random.default_rng(seed)
        table = expand(random_polynomial(rng, 5), ORIGIN, 5)
        R = Radii(*rng.uniform(0.2, 1.0, 2))
        b = np.abs(table.values())
        terms = {(k1, k2): b[k1, k2] * R.r1 ** k1 * R.r2 ** k2
                 for k1 in range(6) for k2 in range(6 - k1)}
        assert maximal_term(table, R).mu.value == pytest.approx(max(terms.values()), rel=1e-12)
        norms = [maximal_term(table, R.scaled(t)).nu_norm for t in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)]
        assert norms == sorted(norms)


class TestMaxModulus:
    def test_monomial(self):
        res = max_modulus(_poly((1, 1, 1.0)), ORIGIN, Radii(0.3, 0.4))
        assert res.M == pytest.approx(0.12, rel=1e-12)

    def test_exponential(self):
        res = max_modulus(function_from_spec({'family': 'exp_linear'}), ORIGIN, Radii(0.3, 0.4))
        assert res.M == pytest.approx(math.exp(0.7), rel=1e-12)
        assert res.argmax.z1 == pytest.approx(0.3)

    def test_rational_product(self):
        res = max_modulus(function_from_spec({'family': 'rational_product', 'shift': 2}), ORIGIN,
                          Radii(0.5, 0.5))
        assert res.M == pytest.approx(1 / 2.25, rel=1e-12)

    def test_refined_samples_never_decrease(self):
        F = example1_function()
        z0 = BidiscPoint(0.2, -0.1j)
        coarse = max_modulus(F, z0, Radii(0.3, 0.3), 16)
        fine = max_modulus(F, z0, Radii(0.3, 0.3), 32)
        assert fine.log_m.log_abs >= coarse.log_m.log_abs

    @settings(max_examples=200, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_cauchy_inequality(self, seed):
        rng = np.random.default_rng(seed)
        F = random_polynomial(rng, 6)
        z0 = _random_point(rng, 0.4)
        R = Radii(*rng.uniform(0.05, 0.5, 2))
        M = max_modulus(F, z0, R, 64).M
        b = np.abs(taylor_closed_form(F, z0, 6).values())
        for k1 in range(7):
            for k2 in range(7 - k1):
                assert b[k1, k2] * R.r1 ** k1 * R.r2 ** k2 <= M * (1 + 1e-9)

    def test_skeleton_outside(self):
        with pytest.raises(SkeletonOutsideDomain):
            max_modulus(example1_function(), BidiscPoint(0.8, 0.0), Radii(0.3, 0.1))


class TestQConstant:
    def test_small_values(self):
        assert q_constant(0, Radii(0.5, 0.5), ((1.0, 1.0), (1.0, 1.0))) == 3
        assert q_constant(1, Radii(1.0, 1.0), ((0.5, 0.5), (2.0, 2.0))) == 513

    def test_tiny_radius(self):
        assert q_constant(2, Radii(1e-9, 1e-9), ((1.0, 1.0), (1.0, 1.0))) == 1

    def test_huge_value_stays_exact_integer(self):
        q = q_constant(300, Radii(1.0, 1.0), ((1.0, 1.0), (10.0, 10.0)))
        assert isinstance(q, int)
        assert q == 1204 * 10 ** 602 + 1

    def test_just_above_float_range_is_exact(self):
        q = q_constant(60, Radii(0.5, 0.5), ((1.0, 1.0), (2.0, 2.0)))
        assert q == 122 * 2 ** 122 + 1

    def test_inconsistent_lambdas(self):
        with pytest.raises(DomainViolation):
            q_constant(1, Radii(1.0, 1.0), ((2.0, 1.0), (1.0, 1.0)))
