import cmath
import logging
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from conftest import random_polynomial
from lindex.coefficients import diagonal_max, expand, normalize
from lindex.criteria import (
    check_hayman, check_kth_max_modulus, check_local_dominance, check_modulus_ratio, check_pure_partials,
    check_tail_dominance, dominance_extraction_radii, find_main_polynomial, index_bound_from_ratio,
    main_polynomial_report, verify_main_polynomial,
)
from lindex.domain import (
    AnalyticFunction, BidiscPoint, MultiIndex, PointGrid, PolarGrid, Radii, TheoremId, Verdict,
)
from lindex.errors import DomainViolation, IterationOverrun, NoNonzeroCoefficient
from lindex.families import function_from_spec, poly_from_terms
from lindex.index import local_index
from lindex.weights import WeightField
from scripts.main_poly_oracle import oracle

ORIGIN = BidiscPoint.origin()
EXP = function_from_spec({'family': 'exp_linear'})
GEOM = function_from_spec({'family': 'rational_geom'})


def _const(v):
    return poly_from_terms([[0, 0, v]])


def _random_point(rng, radius):
    r = radius * rng.uniform(0, 1, 2)
    t = rng.uniform(0, 2 * math.pi, 2)
    return BidiscPoint(r[0] * cmath.exp(1j * t[0]), r[1] * cmath.exp(1j * t[1]))


seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
log_scales = st.floats(min_value=-7.0, max_value=7.0)
angles = st.floats(min_value=0.0, max_value=6.28)


def _factor(log_scale, angle):
    return math.exp(log_scale) * cmath.exp(1j * angle)


class TestLocalDominance:
    def test_constant_function(self, unit_weight):
        report = check_local_dominance(_const(5.0), unit_weight, ORIGIN, Radii(0.5, 0.5), n0=2)
        assert report.verdict is Verdict.HOLDS
        assert report.theorem_id is TheoremId.LOCAL_DOMINANCE
        assert report.witness['p0'] == pytest.approx(1.0)
        assert report.witness['k0'] == [0, 0]

    def test_exponential(self):
        L = WeightField.constant(4.0, 4.0)
        report = check_local_dominance(EXP, L, ORIGIN, Radii(0.8, 0.8), n0=2)
        assert report.verdict is Verdict.HOLDS
        assert report.witness['p0'] == pytest.approx(math.exp(0.4), rel=1e-9)
        assert report.worst_point == BidiscPoint(0.2, 0.2)

    def test_all_derivatives_vanish(self, unit_weight):
        report = check_local_dominance(poly_from_terms([[1, 0, 1.0]]), unit_weight, ORIGIN, Radii(0.5, 0.5), n0=0)
        assert report.verdict is Verdict.FAILS
        assert report.reason.startswith('AllDerivativesVanish')

    def test_negative_n0(self, unit_weight):
        with pytest.raises(DomainViolation):
            check_local_dominance(EXP, unit_weight, ORIGIN, Radii(0.5, 0.5), n0=-1)

    def test_black_box_matches_closed_form(self):
        L = WeightField.constant(4.0, 4.0)
        black_box = AnalyticFunction.black_box(lambda a, b: np.exp(a + b))
        exact = check_local_dominance(EXP, L, ORIGIN, Radii(0.8, 0.8), n0=2)
        sampled = check_local_dominance(black_box, L, ORIGIN, Radii(0.8, 0.8), n0=2)
        assert sampled.sampling['derivatives'] == 'cauchy'
        assert sampled.witness['p0'] == pytest.approx(exact.witness['p0'], rel=1e-8)
        assert sampled.witness['k0'] == exact.witness['k0']

    def test_extraction_radii_capped_by_polydisc(self):
        rho = dominance_extraction_radii(BidiscPoint(0.9, 0.0), Radii(0.3, 0.3))
        assert rho.r1 == pytest.approx(0.05)
        assert rho.r2 == pytest.approx(0.25)
        rho = dominance_extraction_radii(ORIGIN, Radii(0.1, 0.3))
        assert rho.r1 == pytest.approx(0.1)
        assert rho.r2 == pytest.approx(0.25)

    def test_tol_breaks_near_ties_in_degree_order(self, unit_weight):
        F = poly_from_terms([[1, 0, 1.0 + 1e-12], [0, 1, 1.0]])
        loose = check_local_dominance(F, unit_weight, ORIGIN, Radii(0.5, 0.5), n0=1)
        exact = check_local_dominance(F, unit_weight, ORIGIN, Radii(0.5, 0.5), n0=1, tol=0.0)
        assert loose.witness['k0'] == [0, 1]
        assert exact.witness['k0'] == [1, 0]
        with pytest.raises(DomainViolation):
            check_local_dominance(F, unit_weight, ORIGIN, Radii(0.5, 0.5), n0=1, tol=-1.0)

    @settings(max_examples=200, deadline=None)
    @given(seed=seeds, log_scale=log_scales, angle=angles)
    def test_invariant_under_constant_factor(self, seed, log_scale, angle):
        rng = np.random.default_rng(seed)
        F = random_polynomial(rng, 3)
        L = WeightField.constant(4.0, 4.0)
        z0 = _random_point(rng, 0.3)
        first = check_local_dominance(F, L, z0, Radii(0.8, 0.8), n0=2, samples=(1, 4))
        second = check_local_dominance(F.scaled(_factor(log_scale, angle)), L, z0, Radii(0.8, 0.8), n0=2,
                                       samples=(1, 4))
        assert second.witness['p0'] == pytest.approx(first.witness['p0'], rel=1e-9)
        assert second.witness['k0'] == first.witness['k0']


class TestKthMaxModulus:
    def test_constant_function(self):
        report = check_kth_max_modulus(_const(5.0), ORIGIN, Radii(0.3, 0.3), MultiIndex(0, 0))
        assert report.witness['p'] == pytest.approx(1.0)

    def test_exponential(self):
        report = check_kth_max_modulus(EXP, ORIGIN, Radii(0.2, 0.3), MultiIndex(1, 1))
        assert report.verdict is Verdict.HOLDS
        assert report.witness['p'] == pytest.approx(math.exp(0.5), rel=1e-9)

    def test_linear_first_derivative(self):
        report = check_kth_max_modulus(poly_from_terms([[1, 0, 1.0]]), BidiscPoint(0.1, 0.2), Radii(0.3, 0.3), (1, 0))
        assert report.witness['p'] == pytest.approx(1.0)
        assert report.witness['k0'] == [1, 0]

    def test_center_derivative_zero(self):
        report = check_kth_max_modulus(poly_from_terms([[1, 0, 1.0]]), ORIGIN, Radii(0.3, 0.3), MultiIndex(0, 1))
        assert report.verdict is Verdict.FAILS
        assert report.reason.startswith('CenterDerivativeZero')


class TestPurePartials:
    def test_linear(self):
        F = poly_from_terms([[1, 0, 1.0], [0, 1, 1.0]])
        report = check_pure_partials(F, ORIGIN, Radii(0.3, 0.3), 1, 1)
        assert report.verdict is Verdict.HOLDS
        assert report.witness['p'] == pytest.approx(1.0)

    def test_exponential_takes_larger_constant(self):
        report = check_pure_partials(EXP, ORIGIN, Radii(0.2, 0.4), 1, 2)
        assert report.witness['p_first'] == pytest.approx(math.exp(0.6), rel=1e-9)
        assert report.witness['p_second'] == pytest.approx(math.exp(0.6), rel=1e-9)
        assert report.witness['p'] == pytest.approx(math.exp(0.6), rel=1e-9)

    def test_vanishing_second_partial(self):
        F = poly_from_terms([[1, 0, 1.0], [0, 1, 1.0]])
        report = check_pure_partials(F, ORIGIN, Radii(0.3, 0.3), 1, 2)
        assert report.verdict is Verdict.FAILS
        assert report.witness['p_second'] is None


class TestModulusRatio:
    def test_monomial(self, wide_weight):
        F = poly_from_terms([[1, 1, 1.0]])
        report = check_modulus_ratio(F, wide_weight, ORIGIN, Radii(0.5, 0.5), Radii(2.0, 2.0))
        assert report.verdict is Verdict.HOLDS
        assert report.witness['p1'] == pytest.approx(16.0, rel=1e-9)

    def test_constant(self, wide_weight):
        report = check_modulus_ratio(_const(5.0), wide_weight, ORIGIN, Radii(0.5, 0.5), Radii(2.0, 2.0))
        assert report.witness['p1'] == pytest.approx(1.0)

    def test_exponential(self, wide_weight):
        report = check_modulus_ratio(EXP, wide_weight, ORIGIN, Radii(0.5, 0.5), Radii(2.0, 2.0))
        assert report.witness['p1'] == pytest.approx(math.exp(0.375), rel=1e-9)

    def test_monotone_in_outer_radius(self, wide_weight):
        F = poly_from_terms([[1, 1, 1.0], [2, 0, 0.5]])
        grid = PolarGrid(1, 4, 0.5)
        small = check_modulus_ratio(F, wide_weight, grid, Radii(0.5, 0.5), Radii(1.5, 1.5), max_workers=1)
        large = check_modulus_ratio(F, wide_weight, grid, Radii(0.5, 0.5), Radii(2.0, 2.0), max_workers=1)
        assert large.witness['p1'] >= small.witness['p1']

    @settings(max_examples=200, deadline=None)
    @given(seed=seeds, log_scale=log_scales, angle=angles)
    def test_invariant_under_constant_factor(self, seed, log_scale, angle):
        rng = np.random.default_rng(seed)
        F = random_polynomial(rng, 4)
        L = WeightField.constant(8.0, 8.0)
        z0 = _random_point(rng, 0.4)
        first = check_modulus_ratio(F, L, z0, Radii(0.5, 0.5), Radii(2.0, 2.0), samples=32)
        second = check_modulus_ratio(F.scaled(_factor(log_scale, angle)), L, z0, Radii(0.5, 0.5),
                                     Radii(2.0, 2.0), samples=32)
        assert second.witness['p1'] == pytest.approx(first.witness['p1'], rel=1e-9)

    @settings(max_examples=200, deadline=None)
    @given(seed=seeds, r=st.floats(min_value=0.1, max_value=1.0), t=st.floats(min_value=1.05, max_value=1.9))
    def test_non_increasing_in_inner_radius(self, seed, r, t):
        # nonnegative coefficients peak at the sample z0 + rho of every skeleton
        rng = np.random.default_rng(seed)
        F = AnalyticFunction.polynomial(np.abs(random_polynomial(rng, 4).coeffs))
        L = WeightField.constant(8.0, 8.0)
        grid = PointGrid((ORIGIN, BidiscPoint(0.1, 0.2)))
        small = check_modulus_ratio(F, L, grid, Radii(r, r), Radii(2.0, 2.0), samples=16, max_workers=1)
        large = check_modulus_ratio(F, L, grid, Radii(r * t, r * t), Radii(2.0, 2.0), samples=16, max_workers=1)
        assert large.witness['p1'] <= small.witness['p1'] * (1 + 1e-12)

    def test_zero_function(self, wide_weight):
        report = check_modulus_ratio(_const(0.0), wide_weight, ORIGIN, Radii(0.5, 0.5), Radii(2.0, 2.0))
        assert report.verdict is Verdict.FAILS
        assert report.reason.startswith('InnerMaxZero')

    def test_radii_order_and_beta(self, wide_weight):
        with pytest.raises(DomainViolation):
            check_modulus_ratio(EXP, wide_weight, ORIGIN, Radii(2.0, 2.0), Radii(0.5, 0.5))
        with pytest.raises(DomainViolation):
            check_modulus_ratio(EXP, wide_weight, ORIGIN, Radii(0.5, 0.5), Radii(3.0, 3.0))


class TestIndexBoundFromRatio:
    def test_values(self):
        assert index_bound_from_ratio(Radii(0.5, 0.5), Radii(2.0, 2.0), 16.0) == pytest.approx(6.0)
        assert index_bound_from_ratio(Radii(0.5, 0.5), Radii(2.0, 2.0), 1.0) == pytest.approx(2.0)
        assert index_bound_from_ratio(Radii(1e-9, 1e-9), Radii(2.0, 3.0), 1.0) == pytest.approx(0.0, abs=1e-8)

    @pytest.mark.parametrize('Rp,Rs,p1', [
        ((0.5, 0.5), (1.0, 2.0), 2.0),
        ((1.0, 0.5), (2.0, 2.0), 2.0),
        ((0.5, 0.5), (2.0, 2.0), 0.5),
    ])
    def test_domain(self, Rp, Rs, p1):
        with pytest.raises(DomainViolation):
            index_bound_from_ratio(Radii(*Rp), Radii(*Rs), p1)

    def test_floor_bounds_local_index(self, golden_corpus, wide_weight):
        grid = PolarGrid(1, 4, 0.5)
        Rp, Rs = Radii(0.5, 0.5), Radii(2.0, 2.0)
        for F in golden_corpus:
            p1 = check_modulus_ratio(F, wide_weight, grid, Rp, Rs, max_workers=1).witness['p1']
            bound = math.floor(index_bound_from_ratio(Rp, Rs, p1) + 1e-9)
            for p in grid.iter_points():
                assert local_index(F, wide_weight, p, cap=8).n0 <= bound, F.label


class TestHayman:
    def test_constant_function(self, unit_weight):
        report = check_hayman(_const(5.0), unit_weight, ORIGIN, p=0)
        assert report.verdict is Verdict.HOLDS
        assert report.witness['c_min'] == 0.0

    def test_exponential(self):
        report = check_hayman(EXP, WeightField.constant(2.0, 2.0), ORIGIN, p=0)
        assert report.witness['c_min'] == pytest.approx(0.5)

    def test_denominator_zero(self, unit_weight):
        F = poly_from_terms([[1, 0, 1.0], [0, 1, 1.0]])
        report = check_hayman(F, unit_weight, ORIGIN, p=0)
        assert report.verdict is Verdict.FAILS
        assert report.reason.startswith('DenominatorZero')

    def test_necessity_over_corpus(self, golden_corpus, wide_weight):
        grid = PolarGrid(1, 4, 0.5)
        for F in golden_corpus:
            N = max(local_index(F, wide_weight, p, cap=8).n0 for p in grid.iter_points())
            report = check_hayman(F, wide_weight, grid, p=N, N=N, max_workers=1)
            assert report.witness['c_min'] <= math.factorial(N + 1) * (1 + 1e-6), F.label
            assert report.witness['within_factorial_bound']

    @settings(max_examples=200, deadline=None)
    @given(seed=seeds, log_scale=log_scales, angle=angles)
    def test_invariant_under_constant_factor(self, seed, log_scale, angle):
        rng = np.random.default_rng(seed)
        F = random_polynomial(rng, 4)
        L = WeightField.constant(*rng.uniform(0.5, 8.0, 2))
        z0 = _random_point(rng, 0.6)
        base = check_hayman(F, L, z0, p=1).witness['log_c_min']
        scaled = check_hayman(F.scaled(_factor(log_scale, angle)), L, z0, p=1).witness['log_c_min']
        assert scaled == pytest.approx(base, abs=1e-9)


class TestTailDominance:
    def test_geometric_boundary_constant(self):
        L = WeightField.constant(2.0, 2.0)
        assert check_tail_dominance(GEOM, L, ORIGIN, N=1, c=3.0, cap=20).verdict is Verdict.HOLDS
        report = check_tail_dominance(GEOM, L, ORIGIN, N=1, c=3.01, cap=20)
        assert report.verdict is Verdict.FAILS
        assert report.witness['failing_points'] == 1

    def test_head_ratio(self):
        report = check_tail_dominance(GEOM, WeightField.constant(2.0, 2.0), ORIGIN, N=1, c=1.0, cap=20)
        assert report.witness['head_tail_ratio'] == pytest.approx(3.0 / (1 - 4.0 ** -10), rel=1e-9)

    def test_empty_head(self, unit_weight):
        F = poly_from_terms([[1, 0, 1.0]])
        report = check_tail_dominance(F, unit_weight, ORIGIN, N=0, c=0.5, cap=4)
        assert report.verdict is Verdict.FAILS

    def test_truncated_tail_is_inconclusive(self, unit_weight):
        report = check_tail_dominance(EXP, unit_weight, ORIGIN, N=1, c=0.1, cap=4)
        assert report.verdict is Verdict.INCONCLUSIVE
        assert report.witness['truncated_points'] == 1

    def test_domain(self, unit_weight):
        with pytest.raises(DomainViolation):
            check_tail_dominance(EXP, unit_weight, ORIGIN, N=4, c=1.0, cap=4)
        with pytest.raises(DomainViolation):
            check_tail_dominance(EXP, unit_weight, ORIGIN, N=1, c=0.0, cap=4)

    @settings(max_examples=200, deadline=None)
    @given(seed=seeds, log_scale=log_scales, angle=angles, N=st.integers(min_value=0, max_value=3),
           log_c=st.floats(min_value=-3.0, max_value=3.0))
    def test_invariant_under_constant_factor(self, seed, log_scale, angle, N, log_c):
        rng = np.random.default_rng(seed)
        F = random_polynomial(rng, 4)
        L = WeightField.constant(*rng.uniform(0.5, 4.0, 2))
        z0 = _random_point(rng, 0.6)
        c = math.exp(log_c)
        first = check_tail_dominance(F, L, z0, N=N, c=c, cap=6)
        second = check_tail_dominance(F.scaled(_factor(log_scale, angle)), L, z0, N=N, c=c, cap=6)
        assert second.verdict is first.verdict
        assert second.witness['head_tail_ratio'] == pytest.approx(first.witness['head_tail_ratio'], rel=1e-9)


class TestFindMainPolynomial:
    def test_constant_sequence(self):
        res = find_main_polynomial([1.0, 0.0, 0.0], N=0, d=1.0)
        assert (res.m0, res.k0) == (0, 0)
        assert res.r_log.value == pytest.approx(0.5)
        assert res.within_window

    def test_linear_sequence(self):
        res = find_main_polynomial([0.0, 1.0, 0.0], N=0, d=1.0)
        assert (res.m0, res.k0) == (0, 1)

    def test_outside_window(self, caplog):
        with caplog.at_level(logging.WARNING, logger='lindex.criteria'):
            res = find_main_polynomial([1.0, 100.0], N=0, d=1.0)
        assert (res.m0, res.k0) == (2, 0)
        assert res.c_log.value == pytest.approx(74.0)
        assert res.r_log.value == pytest.approx(1 / 10952, rel=1e-12)
        assert not res.within_window
        assert 'm0=2' in caplog.text

    def test_trace(self):
        res = find_main_polynomial([1.0, 100.0], N=0, d=1.0)
        assert [s.m for s in res.trace] == [0, 1, 2]
        assert [s.s for s in res.trace] == [1, 0, 0]
        assert res.trace[-1].s_star is None
        assert res.n0_substituted

    def test_report(self):
        report = main_polynomial_report(find_main_polynomial([1.0, 0.0, 0.0], N=0, d=1.0))
        assert report.theorem_id is TheoremId.MAIN_POLYNOMIAL
        assert report.witness['m0'] == 0
        assert len(report.sampling['trace']) == 1

    def test_candidate_cap(self):
        res = find_main_polynomial([1.0, 0.0, 1e9], N=0, d=1.0, n0=1)
        assert res.k0 == 0
        assert not res.n0_substituted

    def test_iteration_overrun(self):
        L, M = math.log(74.0), 30
        k = np.arange(M + 1)
        log_a = L * (k * M - k ** 2 / 2) - k * math.log(0.5)
        with pytest.raises(IterationOverrun):
            find_main_polynomial(log_a, N=0, d=1.0, log_domain=True)

    def test_invalid_inputs(self):
        with pytest.raises(NoNonzeroCoefficient):
            find_main_polynomial([0.0, 0.0], N=0, d=1.0)
        with pytest.raises(DomainViolation):
            find_main_polynomial([1.0], N=0, d=0.0)
        with pytest.raises(DomainViolation):
            find_main_polynomial([1.0], N=0, d=3.0, beta=2.0)
        with pytest.raises(DomainViolation):
            find_main_polynomial([1.0], N=-1, d=1.0)

    @settings(max_examples=200, deadline=None)
    @given(seed=seeds)
    def test_matches_exact_fractions(self, seed):
        rng = np.random.default_rng(seed)
        N = int(rng.integers(0, 3))
        a = rng.uniform(0, 1, int(rng.integers(2, 7))) * 10.0 ** rng.integers(0, 6, size=1)
        res = find_main_polynomial(a, N=N, d=1.0)
        exact = oracle(list(a), N, 1)
        assert (res.m0, res.k0) == (exact['m0'], exact['k0'])
        assert res.r_log.value == pytest.approx(float(Fraction(exact['r'])), rel=1e-10)

    @settings(max_examples=200, deadline=None)
    @given(log_a=st.lists(st.one_of(st.floats(min_value=-40.0, max_value=40.0), st.just(-math.inf)),
                          min_size=1, max_size=8),
           N=st.integers(min_value=0, max_value=3),
           d=st.floats(min_value=0.05, max_value=2.0))
    def test_trace_shrinks_and_selected_degree_dominates(self, log_a, N, d):
        assume(any(math.isfinite(v) for v in log_a))
        res = find_main_polynomial(log_a, N=N, d=d, log_domain=True)
        degrees = [step.s for step in res.trace]
        assert degrees == sorted(degrees, reverse=True)
        assert res.k0 == degrees[-1]
        log_c, r_log = res.c_log.log_abs, res.r_log.log_abs
        scanned = len(log_a) - 1 if res.m0 == 0 else res.trace[-2].s
        head = log_a[res.k0] + res.k0 * r_log
        for k in range(scanned + 1):
            if k != res.k0:
                assert log_a[k] + k * r_log <= head - log_c + 1e-9

    def test_oracle_example(self):
        assert oracle([1, 100], 0, 1) == {'c': 74, 'm0': 2, 'k0': 0, 'r': '1/10952'}


class TestVerifyMainPolynomial:
    def test_constant(self, unit_weight):
        report = verify_main_polynomial(expand(_const(5.0), ORIGIN, 4), unit_weight, ORIGIN, Radii(0.5, 0.5), 0)
        assert report.verdict is Verdict.HOLDS
        assert report.witness['lhs'] == 0.0

    def test_linear_band_too_small(self, unit_weight):
        F = poly_from_terms([[0, 0, 1.0], [1, 0, 1.0], [0, 1, 1.0]])
        report = verify_main_polynomial(expand(F, ORIGIN, 4), unit_weight, ORIGIN, Radii(0.1, 0.1), 1)
        assert report.verdict is Verdict.FAILS
        assert report.witness['rhs'] == pytest.approx(0.05)
        assert report.witness['lhs'] == pytest.approx(1.0)

    @pytest.mark.parametrize('r,verdict', [(0.2, Verdict.HOLDS), (0.3, Verdict.FAILS)])
    def test_constant_band(self, unit_weight, r, verdict):
        F = poly_from_terms([[0, 0, 1.0], [1, 0, 1.0], [0, 1, 1.0]])
        report = verify_main_polynomial(expand(F, ORIGIN, 4), unit_weight, ORIGIN, Radii(r, r), 0)
        assert report.verdict is verdict
        assert report.witness['lhs'] == pytest.approx(2 * r, rel=1e-12)

    def test_empty_band(self, unit_weight):
        F = poly_from_terms([[0, 0, 1.0], [2, 0, 1.0]])
        report = verify_main_polynomial(expand(F, ORIGIN, 4), unit_weight, ORIGIN, Radii(0.1, 0.1), 1)
        assert report.verdict is Verdict.FAILS
        assert report.reason.startswith('EmptyBand')

    def test_center_mismatch(self, unit_weight):
        with pytest.raises(DomainViolation):
            verify_main_polynomial(expand(EXP, ORIGIN, 4), unit_weight, BidiscPoint(0.1, 0.0), Radii(0.1, 0.1), 0)

    @pytest.mark.parametrize('center,level', [
        ((0, 0), 1.0),
        ((0, 0), 8.0),
        ((0.3, -0.2), 8.0),
        ((0.1j, 0.4), 8.0),
        ((0.3, -0.2), 1.0),
    ])
    def test_search_result_verifies(self, golden_corpus, center, level):
        L = WeightField.constant(level, level)
        z0 = BidiscPoint(*center)
        for F in golden_corpus:
            N = local_index(F, L, z0, cap=8).n0
            table = expand(F, z0, 6)
            a = diagonal_max(normalize(table, L))
            res = find_main_polynomial(a, N=N, d=1.0, log_domain=True)
            r = math.exp(res.r_log.log_abs)
            report = verify_main_polynomial(table, L, z0, Radii(r, r), res.k0)
            assert report.verdict is Verdict.HOLDS, (F.label, center, level)
