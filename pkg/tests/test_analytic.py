"""Tests for the closed-form theory: cycle points, regimes, support
geometry, comparison functions, and stability integrals."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate, optimize

from stochlogistic import (
    LAMBDA_C4,
    LAMBDA_VERTEX,
    ParameterDistribution,
    WindowCase,
    band_geometry,
    check_ordering,
    classify_regime,
    comparison_functions,
    convexity_on_interval,
    detect_period,
    fixed_point,
    fixed_points,
    h_function_roots,
    h_second_derivative,
    period2_average,
    period2_points,
    periodic_orbit,
    stability_preconditions,
    support_intervals,
)
from stochlogistic.analytic import Regime
from stochlogistic.errors import (
    ConvergenceError,
    DomainError,
    OrderingError,
    RegimeError,
    RootCountError,
)

from oracles import (
    central_second_difference,
    grid_image_sweep,
    orbit_tail_mean,
    quartic_two_cycle,
)

# frozen by the plain-iteration oracle (5000 burn-in steps, see
# oracles.orbit_tail_mean); drift-free to the last digit at 1e5 steps
PERIOD4_MEAN_AT_3_508 = 0.6466413116608533


class TestFixedPoints:
    def test_extinction_only_zero(self):
        assert fixed_points(0.5) == {0.0}

    def test_two_fixed_points(self):
        assert fixed_points(2.0) == {0.0, 0.5}

    def test_value(self):
        assert sorted(fixed_points(3.2)) == pytest.approx([0.0, 0.6875], abs=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            fixed_points(4.2)


class TestPeriod2Points:
    def test_degenerate_at_first_doubling(self):
        pair = period2_points(3.0)
        assert pair.p == pair.q == pytest.approx(2.0 / 3.0, abs=1e-15)

    @pytest.mark.parametrize("lam", [3.2, 3.4])
    def test_against_quartic_roots(self, lam):
        pair = period2_points(lam)
        p, q = quartic_two_cycle(lam)
        assert pair.p == pytest.approx(p, abs=1e-7)
        assert pair.q == pytest.approx(q, abs=1e-7)

    def test_sum_rule(self):
        pair = period2_points(3.4)
        assert pair.p + pair.q == pytest.approx(4.4 / 3.4, abs=1e-14)

    def test_below_three_rejected(self):
        with pytest.raises(DomainError):
            period2_points(2.99)

    def test_vieta_property(self):
        rng = np.random.default_rng(2)
        for lam in rng.uniform(3.0 + 1e-9, LAMBDA_C4 - 1e-9, 1000):
            pair = period2_points(lam)
            assert abs(pair.p + pair.q - (lam + 1.0) / lam) < 1e-12
            assert abs(pair.p * pair.q - (lam + 1.0) / lam**2) < 1e-12

    def test_swap_property(self):
        rng = np.random.default_rng(3)
        for lam in rng.uniform(3.0 + 1e-9, LAMBDA_C4 - 1e-9, 1000):
            pair = period2_points(lam)
            assert abs(lam * pair.p * (1 - pair.p) - pair.q) < 1e-12
            assert abs(lam * pair.q * (1 - pair.q) - pair.p) < 1e-12


class TestPeriod2Average:
    def test_values(self):
        assert period2_average(3.0) == pytest.approx(2.0 / 3.0, abs=1e-15)
        assert period2_average(3.2) == pytest.approx(0.65625, abs=1e-15)
        assert period2_average(3.208) == pytest.approx(4.208 / 6.416, abs=1e-7)

    def test_matches_pair_mean(self):
        pair = period2_points(3.3)
        avg = period2_average(3.3)
        assert abs(pair.average - avg) <= 2 * np.spacing(avg)


class TestClassifyRegime:
    def test_period1_window(self):
        assert classify_regime(1.484, 1.532) is Regime.PERIOD1

    def test_period2_window(self):
        assert classify_regime(3.184, 3.232) is Regime.PERIOD2

    def test_straddle_rejected(self):
        with pytest.raises(RegimeError):
            classify_regime(2.9, 3.1)

    def test_boundary_touch_rejected(self):
        with pytest.raises(RegimeError):
            classify_regime(3.0, 3.2)

    @pytest.mark.parametrize(
        "lo,hi,regime",
        [
            (0.2, 0.8, Regime.EXTINCTION),
            (0.0, 1.0, Regime.EXTINCTION),
            (3.47, 3.53, Regime.PERIOD4),
            (3.56, 3.9, Regime.CASCADE),
            (3.6, 4.0, Regime.CASCADE),
        ],
    )
    def test_labels(self, lo, hi, regime):
        assert classify_regime(lo, hi) is regime

    def test_domain(self):
        with pytest.raises(DomainError):
            classify_regime(-0.1, 2.0)
        with pytest.raises(DomainError):
            classify_regime(2.0, 1.0)


class TestDetectPeriod:
    @pytest.mark.parametrize(
        "lam,period",
        [(2.0, 1), (2.5, 1), (2.9, 1), (3.05, 2), (3.2, 2), (3.4, 2), (3.47, 4), (3.5, 4), (3.53, 4)],
    )
    def test_known_periods(self, lam, period):
        assert detect_period(lam) == period

    def test_chaotic_rate_fails(self):
        with pytest.raises(ConvergenceError):
            detect_period(3.9, max_iter=50_000)

    def test_preperiodic_critical_point_at_four(self):
        # x0 = 0.5 maps onto the fixed point 0 in two steps at lam = 4
        assert detect_period(4.0) == 1

    def test_bad_tol(self):
        with pytest.raises(DomainError):
            detect_period(3.2, tol=0.0)


class TestPeriodicOrbit:
    def test_two_cycle(self):
        p, q = quartic_two_cycle(3.2)
        assert periodic_orbit(3.2, 2) == pytest.approx([p, q], abs=1e-6)

    def test_fixed_point(self):
        assert periodic_orbit(2.5, 1) == pytest.approx([0.6], abs=1e-12)

    def test_period4_mean_regression(self):
        pts = periodic_orbit(3.508, 4)
        assert len(pts) == 4 and pts == sorted(pts)
        mean = sum(pts) / 4.0
        assert mean == pytest.approx(PERIOD4_MEAN_AT_3_508, abs=1e-12)
        assert mean == pytest.approx(orbit_tail_mean(3.508, 4), abs=1e-12)

    def test_wrong_period_rejected(self):
        with pytest.raises(DomainError):
            periodic_orbit(3.2, 4)


class TestSupportIntervals:
    def test_reference_window(self):
        sup = support_intervals(3.2, 0.1)
        assert sup.p_lo == pytest.approx(0.450372, abs=1e-5)
        assert sup.p_hi == pytest.approx(0.594017, abs=1e-5)
        assert sup.q_lo == pytest.approx(0.764567, abs=1e-5)
        assert sup.q_hi == pytest.approx(0.825, abs=1e-5)
        assert sup.case is WindowCase.SPANS

    def test_degenerate_window(self):
        pair = period2_points(3.2)
        sup = support_intervals(3.2, 0.0)
        assert sup.p_lo == pytest.approx(pair.p, abs=1e-14)
        assert sup.p_hi == pytest.approx(pair.p, abs=1e-14)
        assert sup.q_lo == pytest.approx(pair.q, abs=1e-14)
        assert sup.q_hi == pytest.approx(pair.q, abs=1e-14)

    def test_window_below_vertex(self):
        sup = support_intervals(3.15, 0.05)
        assert sup.case is WindowCase.BELOW
        assert sup.q_lo == pytest.approx(period2_points(3.1).q, abs=1e-5)
        assert sup.q_hi == pytest.approx(period2_points(3.2).q, abs=1e-5)
        assert sup.q_lo == pytest.approx(0.764567, abs=1e-5)
        assert sup.q_hi == pytest.approx(0.799456, abs=1e-5)

    def test_window_above_vertex(self):
        sup = support_intervals(3.3, 0.02)
        assert sup.case is WindowCase.ABOVE
        assert 3.3 - 0.02 > LAMBDA_VERTEX

    def test_regime_error(self):
        with pytest.raises(RegimeError):
            support_intervals(3.3, 0.2)

    @pytest.mark.parametrize("lb,dl", [(3.2, 0.1), (3.15, 0.05), (3.208, 0.024), (3.3, 0.02)])
    def test_grid_sweep_oracle(self, lb, dl):
        """Brute-force image sweep of both cycle-point intervals matches
        the closed forms within one grid cell."""
        a, b = lb - dl, lb + dl
        pp, pm = period2_points(b).p, period2_points(a).p
        qm, qp = period2_points(a).q, period2_points(b).q
        sup = support_intervals(lb, dl)
        p_img = grid_image_sweep(a, b, qm, qp)
        q_img = grid_image_sweep(a, b, pp, pm)
        cell = max(pm - pp, qp - qm, 1e-12) / 1000 + (b - a) / 1000
        assert p_img[0] == pytest.approx(sup.p_lo, abs=cell)
        assert p_img[1] == pytest.approx(sup.p_hi, abs=cell)
        assert q_img[0] == pytest.approx(sup.q_lo, abs=cell)
        assert q_img[1] == pytest.approx(sup.q_hi, abs=cell)

    def test_contains_interval_union(self):
        sup = support_intervals(3.2, 0.1)
        assert sup.contains(0.5)
        assert sup.contains(0.8)
        assert not sup.contains(0.7)
        assert sup.contains(sup.p_lo - 1e-10, inflate=1e-9)


class TestCheckOrdering:
    def test_reference_chain(self):
        chain = dict(check_ordering(3.2, 0.1))
        assert chain["x_star_lo"] == pytest.approx(0.6774194, abs=1e-6)
        assert chain["x_star_hi"] == pytest.approx(0.6969697, abs=1e-6)
        values = [v for _, v in check_ordering(3.2, 0.1)]
        assert values == sorted(values)

    def test_degenerate_collapses(self):
        chain = dict(check_ordering(3.2, 0.0))
        assert chain["p_plus"] == chain["p_minus"]
        assert chain["q_minus"] == chain["q_plus"]

    def test_regime_error(self):
        with pytest.raises(RegimeError):
            check_ordering(3.3, 0.2)

    def test_never_raises_on_grid(self):
        # 50 x 20 windows spread across the two-cycle regime.  The chain
        # (and the two-peak support structure itself) requires the noise
        # half-width to be small relative to the distance past the first
        # doubling: asymptotically dl < 0.75*sqrt(a - 3).  Near the left
        # edge large windows genuinely violate x_p_max < x*(a), so the
        # grid stays within the smallness region (factor 0.3, a 2.5x
        # margin on the asymptotic bound).
        c = 0.3
        for lb in np.linspace(3.02, LAMBDA_C4 - 0.02, 50):
            s = lb - 3.0
            small = (-c * c + math.sqrt(c**4 + 4 * c * c * s)) / 2.0
            cap = min(0.95 * min(s, LAMBDA_C4 - lb), small)
            for dl in np.linspace(0.0, cap, 20):
                check_ordering(float(lb), float(dl))

    def test_raises_when_noise_exceeds_smallness(self):
        # counterexample window hugging the doubling point: the p-side
        # image overshoots the left fixed point and the chain breaks
        with pytest.raises(OrderingError):
            check_ordering(3.0367, 0.0349)


class TestComparisonFunctions:
    def test_fixed_point_is_second_iterate_fixed(self):
        f, _, _ = comparison_functions(3.2, 0.0, 0.6875)
        assert abs(f) < 1e-12

    def test_zero_is_zero(self):
        f, _, big_h = comparison_functions(3.3, 0.0, 0.0)
        assert f == 0.0 and big_h == 0.0

    def test_shift_at_zero(self):
        _, _, big_h = comparison_functions(3.2, 0.001, 0.0)
        assert big_h == pytest.approx(0.0032, abs=1e-18)

    def test_shift_identity_property(self):
        rng = np.random.default_rng(4)
        for _ in range(1000):
            lam = rng.uniform(3.0, LAMBDA_C4)
            eps = rng.uniform(0.0, 0.01)
            x = rng.uniform(0.0, 1.0)
            f, _, big_h = comparison_functions(lam, eps, x)
            scale = max(abs(f), abs(big_h), 1.0)
            assert abs((big_h - f) - lam * eps) <= 4.0 * np.spacing(scale)

    def test_deterministic_limit_property(self):
        # lam * h(x) with no shift equals the second iterate
        rng = np.random.default_rng(5)
        for _ in range(1000):
            lam = rng.uniform(3.0, LAMBDA_C4)
            x = rng.uniform(0.0, 1.0)
            _, h, _ = comparison_functions(lam, 0.0, x)
            u = lam * x * (1.0 - x)
            ss = lam * (u * (1.0 - u))
            assert abs(lam * h - ss) <= 4.0 * np.spacing(max(abs(ss), 1.0))


class TestHSecondDerivative:
    def test_reference_value(self):
        assert h_second_derivative(3.2, 0.5) == pytest.approx(3.84, abs=1e-12)

    def test_at_zero(self):
        for lam in (3.05, 3.2, 3.4):
            assert h_second_derivative(lam, 0.0) == pytest.approx(
                -2.0 * (lam + lam * lam), abs=1e-12
            )

    def test_positive_on_left_interval(self):
        sup = support_intervals(3.2, 0.1)
        xs = np.linspace(sup.p_lo, sup.p_hi, 2000)
        assert all(h_second_derivative(3.2, float(x)) > 0 for x in xs)

    def test_finite_difference_property(self):
        rng = np.random.default_rng(6)
        for _ in range(1000):
            lam = rng.uniform(3.0, LAMBDA_C4)
            x = rng.uniform(0.0, 1.0)
            h_of = lambda t: comparison_functions(lam, 0.0, t)[1]  # noqa: E731
            fd = central_second_difference(h_of, x)
            exact = h_second_derivative(lam, x)
            assert abs(fd - exact) <= 1e-5 * max(1.0, abs(exact))


class TestConvexity:
    def test_left_interval_true(self):
        sup = support_intervals(3.2, 0.1)
        assert convexity_on_interval(3.2, sup.I_p) is True

    def test_near_zero_false(self):
        assert convexity_on_interval(3.2, (0.0, 0.05)) is False

    def test_point_interval(self):
        assert convexity_on_interval(3.2, (0.5, 0.5)) is True

    def test_validation(self):
        with pytest.raises(DomainError):
            convexity_on_interval(3.2, (0.5, 0.2))


class TestHFunctionRoots:
    def test_unshifted_roots(self):
        p, q = quartic_two_cycle(3.2)
        roots = h_function_roots(3.2, 0.0)
        assert roots[0] == pytest.approx(0.0, abs=1e-9)
        assert roots[1] == pytest.approx(p, abs=1e-9)
        assert roots[2] == pytest.approx(0.6875, abs=1e-9)
        assert roots[3] == pytest.approx(q, abs=1e-9)

    def test_shifted_root_chain(self):
        pair = period2_points(3.2)
        x_star = fixed_point(3.2)
        z_h, p_h, xs_h, q_h = h_function_roots(3.2, 0.001)
        assert z_h < 0.0 < pair.p < p_h < xs_h < x_star < pair.q < q_h

    def test_excessive_shift(self):
        with pytest.raises(RootCountError):
            h_function_roots(3.2, 10.0)

    def test_against_brentq_oracle(self):
        lam, eps = 3.25, 0.0005

        def H(x):
            u = lam * x * (1.0 - x)
            return lam * (u - u * u + eps) - x

        mine = h_function_roots(lam, eps)
        # bracket each root with the scan the oracle does not share
        xs = np.linspace(-0.5, 1.2, 4001)
        vals = np.array([H(x) for x in xs])
        brackets = [
            (xs[i], xs[i + 1])
            for i in range(len(xs) - 1)
            if vals[i] * vals[i + 1] < 0
        ]
        assert len(brackets) == 4
        theirs = sorted(optimize.brentq(H, a, b, xtol=1e-13) for a, b in brackets)
        assert mine == pytest.approx(theirs, abs=1e-9)

    def test_ordering_property_across_rates(self):
        rng = np.random.default_rng(7)
        for lam in rng.uniform(3.05, 3.4, 1000):
            pair = period2_points(lam)
            x_star = fixed_point(lam)
            eps = 1e-4
            z_h, p_h, xs_h, q_h = h_function_roots(lam, eps)
            assert z_h < 0.0 < pair.p < p_h < xs_h < x_star < pair.q < q_h


class TestStabilityPreconditions:
    def test_narrow_window_near_log_center(self):
        dist = ParameterDistribution(1.508, 0.024)
        e_log, finite = stability_preconditions(dist)
        assert finite is True
        assert e_log > 0.0
        assert e_log == pytest.approx(math.log(1.508), abs=1e-4)

    def test_matches_quadrature(self):
        for lb, dl in [(1.508, 0.024), (0.7, 0.2), (3.208, 0.024), (2.0, 1.9)]:
            dist = ParameterDistribution(lb, dl)
            e_log, _ = stability_preconditions(dist)
            a, b = dist.support
            expected, _ = integrate.quad(lambda t: math.log(t) / (b - a), a, b)
            assert e_log == pytest.approx(expected, abs=1e-10)

    def test_negative_window(self):
        e_log, finite = stability_preconditions(ParameterDistribution(0.7, 0.2))
        assert e_log < 0.0 and finite is True

    def test_degenerate_at_one(self):
        e_log, _ = stability_preconditions(ParameterDistribution(1.0, 0.0))
        assert e_log == 0.0


class TestBandGeometry:
    def test_reference_values(self):
        center, width = band_geometry(2.0, 0.1)
        assert center == pytest.approx(0.4987469, abs=1e-7)
        assert width == pytest.approx(0.0501253, abs=1e-7)

    def test_matches_fixed_point_endpoints(self):
        # the band is the interval between the two endpoint fixed points
        for lb, dl in [(2.0, 0.1), (1.508, 0.024), (2.5, 0.3)]:
            center, width = band_geometry(lb, dl)
            lo, hi = fixed_point(lb - dl), fixed_point(lb + dl)
            assert center == pytest.approx((lo + hi) / 2.0, abs=1e-12)
            assert width == pytest.approx(hi - lo, abs=1e-12)

    def test_degenerate(self):
        assert band_geometry(2.0, 0.0) == (pytest.approx(0.5), pytest.approx(0.0))

    def test_monotone_center(self):
        center, _ = band_geometry(1.508, 0.024)
        assert fixed_point(1.484) < center < fixed_point(1.532)

    def test_regime_error(self):
        with pytest.raises(RegimeError):
            band_geometry(2.0, 1.5)
        with pytest.raises(RegimeError):
            band_geometry(3.1, 0.05)
