"""Existence classification, oscillation smallness, moment conditions."""

import numpy as np
import pytest

from hessianls.coefficients import (
    RadialProfile,
    RadializedTriple,
    triple_from_radial,
)
from hessianls.core import ProblemParams, RadialGrid
from hessianls.criteria import (
    BOUNDED,
    INCONCLUSIVE,
    LARGE,
    bounded_solution_bound,
    classify_existence,
    compute_b_tilde,
    growth_primitive,
    jensen_conditions,
    keller_osserman_integrand,
    oscillation_condition,
    oscillation_threshold,
    tail_exponent_of,
)
from hessianls.errors import ParameterError
from hessianls.solver import solve_cauchy, solve_linear_rhs

B_ONE = RadialProfile.constant(1.0)


def _table_from(profile, r_max=1e4, count=101):
    """Tabulate a closed-form profile (from r = 0) without a declared tail,
    forcing the fitted-exponent code path."""
    r = np.concatenate([[0.0], np.geomspace(0.1, r_max, count)])
    return RadialProfile.tabulated(r, profile(r))


def _aniso_triple(l, m, amp=0.5):
    """Synthetic envelope triple with declared tails l (envelope) and m
    (oscillation)."""
    star = RadialProfile.power_tail(l)
    upper = RadialProfile.power_tail(l, m=m, A=amp)
    osc = RadialProfile.power_tail(m, scale=amp)
    return RadializedTriple(star, upper, osc)


class TestTailExponent:
    def test_declared_wins(self):
        est = tail_exponent_of(RadialProfile.power_tail(1.7))
        assert est.exponent == 1.7
        assert est.source == "declared"
        assert est.stderr == 0.0

    def test_constant_declares_zero(self):
        est = tail_exponent_of(B_ONE)
        assert est.exponent == 0.0 and est.source == "declared"

    def test_fit_on_tabulated_power(self):
        b = _table_from(RadialProfile.power_tail(2.6).scaled(3.0))
        est = tail_exponent_of(b)
        assert est.source == "fitted"
        assert est.exponent == pytest.approx(2.6, abs=1e-3)
        assert est.stderr < 1e-3

    def test_none_for_short_table(self):
        b = RadialProfile.tabulated([0.0, 1.0, 2.0], [1.0, 0.5, 0.25])
        assert tail_exponent_of(b) is None

    def test_none_for_bare_callable(self):
        b = RadialProfile.from_callable(lambda r: np.exp(-np.asarray(r)))
        assert tail_exponent_of(b) is None


class TestGrowthIntegrand:
    def test_laplace_oracle(self, laplace_params):
        # k = 1, n = 3, b = 1: J(r) = r/3.
        for r in (0.5, 1.0, 7.0):
            assert keller_osserman_integrand(B_ONE, r, laplace_params) == pytest.approx(
                r / 3.0, rel=1e-10
            )

    def test_hessian_oracle(self):
        # k = 2, n = 4, b = 1: J(r) = r / sqrt(6).
        params = ProblemParams(n=4, k=2, gamma=1.0)
        assert keller_osserman_integrand(B_ONE, 3.0, params) == pytest.approx(
            3.0 / 6.0**0.5, rel=1e-10
        )

    def test_boundary_cases(self, laplace_params):
        assert keller_osserman_integrand(B_ONE, 0.0, laplace_params) == 0.0
        with pytest.raises(ParameterError):
            keller_osserman_integrand(B_ONE, -1.0, laplace_params)

    def test_tail_constant(self, laplace_params):
        # l = k = 1: J tends to the constant (n/((n-l) C(n,k)))^(1/k) = 1/2.
        b = RadialProfile.power_tail(1.0)
        assert keller_osserman_integrand(b, 1e6, laplace_params) == pytest.approx(
            0.5, rel=1e-2
        )

    def test_primitive_oracle(self, laplace_params):
        # integral of r/3 is r^2/6.
        r = np.array([0.0, 1.0, 4.0, 10.0])
        np.testing.assert_allclose(
            growth_primitive(laplace_params, B_ONE, r), r**2 / 6.0, rtol=1e-9, atol=1e-14
        )
        assert growth_primitive(laplace_params, B_ONE, 2.0) == pytest.approx(4.0 / 6.0, rel=1e-9)

    def test_primitive_matches_linear_solver(self, laplace_params):
        b = RadialProfile.power_tail(1.0)
        grid = RadialGrid.build(100.0, nodes_per_decade=16)
        via_solver = solve_linear_rhs(laplace_params, b, grid)
        via_primitive = growth_primitive(laplace_params, b, grid.nodes)
        # Two independent discretizations of the same quadrature: they
        # agree to their respective Simpson errors, not to rounding.
        np.testing.assert_allclose(via_primitive, via_solver, rtol=1e-4, atol=1e-12)


class TestBTilde:
    def test_unit_at_origin(self, laplace_params, hessian2_params):
        for params in (laplace_params, hessian2_params):
            assert compute_b_tilde(B_ONE, 0.0, params) == 1.0

    def test_constant_oracle(self, laplace_params):
        # k = 1, gamma = 1/2: exponent k gamma/(k-gamma) = 1, so
        # btilde = 1 + r^2/6 for b = 1.
        s = np.array([0.0, 1.0, 3.0])
        np.testing.assert_allclose(
            compute_b_tilde(B_ONE, s, laplace_params), 1 + s**2 / 6.0, rtol=1e-9
        )

    def test_growth_exponent(self, laplace_params):
        # l = 1, k = 1, gamma = 1/2: ubar grows linearly, so btilde grows
        # like r^((2k-l) gamma/(k-gamma)) = r^1.
        b = RadialProfile.power_tail(1.0)
        r = np.geomspace(1e2, 1e4, 25)
        vals = compute_b_tilde(b, r, laplace_params)
        slope = np.polyfit(np.log(r), np.log(vals), 1)[0]
        assert slope == pytest.approx(1.0, rel=0.02)


class TestBoundedBound:
    def test_reduces_to_center_value(self, laplace_params):
        assert bounded_solution_bound(laplace_params, B_ONE, 0.0) == pytest.approx(
            laplace_params.a
        )

    def test_constant_oracle(self, laplace_params):
        # (1 + r^2/12)^2 for a = 1, b = 1, k = 1, gamma = 1/2.
        r = np.array([0.5, 2.0, 10.0])
        np.testing.assert_allclose(
            bounded_solution_bound(laplace_params, B_ONE, r),
            (1 + r**2 / 12.0) ** 2,
            rtol=1e-9,
        )

    @pytest.mark.parametrize("l", [0.0, 1.0, 3.0])
    def test_dominates_solver(self, laplace_params, l):
        # The closed-form bound holds along every radial solve whose
        # coefficient sits below b_star (here equal to it).
        b = RadialProfile.power_tail(l)
        grid = RadialGrid.build(1e3, nodes_per_decade=24)
        curve = solve_cauchy(laplace_params, b, grid)
        bound = bounded_solution_bound(laplace_params, b, grid.nodes)
        assert np.all(curve.u <= bound * (1 + 1e-8))


class TestClassification:
    @pytest.mark.parametrize(
        "n,k,l,expected",
        [
            (3, 1, 2.0, LARGE),
            (3, 1, 2.5, BOUNDED),
            (3, 1, 3.0, BOUNDED),
            (3, 1, 0.0, LARGE),
            (5, 2, 1.0, LARGE),
            (5, 2, 4.0, LARGE),
            (5, 2, 4.5, BOUNDED),
        ],
    )
    def test_threshold_at_declared_tails(self, n, k, l, expected):
        params = ProblemParams(n=n, k=k, gamma=0.5 * k)
        verdict = classify_existence(RadialProfile.power_tail(l), params, r_max=100.0)
        assert verdict.verdict == expected
        assert verdict.threshold == 2 * k
        assert verdict.tail_exponent == l

    def test_dimension_branch(self):
        # n <= 2k: divergence regardless of how fast the coefficient decays.
        params = ProblemParams(n=4, k=2, gamma=1.0)
        verdict = classify_existence(RadialProfile.power_tail(10.0), params, r_max=50.0)
        assert verdict.verdict == LARGE
        assert any("dimension branch" in e for e in verdict.evidence)

    def test_fitted_tail_verdict(self, laplace_params):
        b = _table_from(RadialProfile.power_tail(2.6).scaled(3.0))
        verdict = classify_existence(b, laplace_params, r_max=1e3)
        assert verdict.verdict == BOUNDED
        assert verdict.tail_exponent == pytest.approx(2.6, abs=1e-3)

    def test_fitted_tie_is_inconclusive(self, laplace_params):
        # Boundary-exponent data with alternating noise: the fit lands
        # within one standard error of the threshold and the verdict must
        # refuse to call the side.
        r = np.concatenate([[0.0], np.geomspace(0.1, 1e4, 101)])
        noise = np.exp(0.3 * (-1.0) ** np.arange(r.size))
        b = RadialProfile.tabulated(r, (1 + r**2) ** -1.0 * noise)
        verdict = classify_existence(b, laplace_params, r_max=1e3)
        assert verdict.verdict == INCONCLUSIVE

    def test_no_tail_is_inconclusive(self, laplace_params):
        b = RadialProfile.from_callable(lambda r: 1.0 / (1.0 + np.asarray(r)))
        verdict = classify_existence(b, laplace_params, r_max=10.0)
        assert verdict.verdict == INCONCLUSIVE

    def test_scale_invariance(self, laplace_params):
        # The verdict is a tail property: rescaling b never flips it.
        for l, expected in ((1.5, LARGE), (2.7, BOUNDED)):
            b = RadialProfile.power_tail(l)
            for c in (0.07, 1.0, 12.3):
                v = classify_existence(b.scaled(c), laplace_params, r_max=50.0)
                assert v.verdict == expected
        fitted = _table_from(RadialProfile.power_tail(2.6))
        assert (
            classify_existence(fitted.scaled(12.3), laplace_params, r_max=1e3).verdict
            == BOUNDED
        )

    def test_verdicts_match_actual_growth(self, laplace_params):
        # Large: the solution passes any fixed level; here 10a by r = 1e6.
        grid = RadialGrid.build(1e6, nodes_per_decade=16)
        large = solve_cauchy(laplace_params, RadialProfile.power_tail(2.0), grid)
        assert large.u[-1] > 10 * laplace_params.a
        # Bounded: the solution stays under the closed-form ceiling.
        b = RadialProfile.power_tail(2.5)
        bounded = solve_cauchy(laplace_params, b, grid)
        ceiling = bounded_solution_bound(laplace_params, b, grid.nodes[-1])
        assert bounded.u[-1] <= ceiling * (1 + 1e-8)
        assert np.isfinite(ceiling)


class TestOscillation:
    def test_radial_triple_trivially_satisfied(self):
        params = ProblemParams(n=3, k=1, gamma=0.5)
        report = oscillation_condition(triple_from_radial(B_ONE), params)
        assert report.satisfied
        assert report.integral == 0.0

    def test_threshold_formula(self):
        # m* = l + (2k - l) k/(k - gamma) == (2k^2 - l gamma)/(k - gamma).
        for n, k, gam, l in [(3, 1, 0.5, 1.0), (5, 2, 1.3, 0.7), (9, 4, 2.0, 3.5)]:
            params = ProblemParams(n=n, k=k, gamma=gam)
            m_star = oscillation_threshold(params, l)
            assert m_star == pytest.approx((2 * k**2 - l * gam) / (k - gam), rel=1e-14)

    def test_satisfied_above_threshold(self, laplace_params):
        # k = 1, n = 3, gamma = 1/2, l = 1: m* = 3; m = 3.5 passes.
        report = oscillation_condition(_aniso_triple(1.0, 3.5), laplace_params)
        assert report.status == "satisfied"
        assert report.m_star == pytest.approx(3.0)
        assert np.isfinite(report.integral) and report.integral > 0.0
        assert report.finite_part < report.integral  # tail estimate added

    def test_violated_below_threshold(self, laplace_params):
        report = oscillation_condition(_aniso_triple(1.0, 2.5), laplace_params)
        assert report.status == "violated"
        assert report.integral == float("inf")
        assert report.m_star == pytest.approx(3.0)

    def test_dimension_branch_always_violated(self):
        # n = 4 = 2k: even a very fast-decaying oscillation fails.
        params = ProblemParams(n=4, k=2, gamma=1.0)
        report = oscillation_condition(_aniso_triple(1.0, 20.0, amp=1e-3), params)
        assert report.status == "violated"
        assert any("dimension branch" in e for e in report.evidence)

    def test_inconclusive_without_tails(self, laplace_params):
        star = RadialProfile.power_tail(1.0)
        osc = RadialProfile.from_callable(lambda r: 0.1 / (1.0 + np.asarray(r) ** 2))
        triple = RadializedTriple(star, star, osc)
        report = oscillation_condition(triple, laplace_params)
        assert report.status == "inconclusive"


class TestJensenConditions:
    def test_constant_coefficient(self, hessian2_params):
        report = jensen_conditions(triple_from_radial(B_ONE), hessian2_params, r_max=100.0)
        assert report.radial_moment["status"] == "divergent"
        # b^(1/k) = 1: the finite part is r_max^2/2.
        assert report.radial_moment["finite_part"] == pytest.approx(5000.0, rel=1e-9)
        assert report.oscillation_moment_bound["status"] == "convergent"

    def test_radial_moment_threshold(self, hessian2_params):
        # Divergent iff l <= 2k.
        fast = triple_from_radial(RadialProfile.power_tail(4.5))
        slow = triple_from_radial(RadialProfile.power_tail(4.0))
        assert jensen_conditions(fast, hessian2_params).radial_moment["status"] == "convergent"
        assert jensen_conditions(slow, hessian2_params).radial_moment["status"] == "divergent"

    def test_oscillation_moment_threshold(self, hessian2_params):
        # k = 2, gamma = 1, l = 1: the moment bound flips at the same
        # m* = 7 as the full oscillation condition (no dimension branch).
        conv = jensen_conditions(_aniso_triple(1.0, 8.0), hessian2_params)
        div = jensen_conditions(_aniso_triple(1.0, 6.0), hessian2_params)
        assert conv.oscillation_moment_bound["status"] == "convergent"
        assert div.oscillation_moment_bound["status"] == "divergent"

    def test_implications_are_one_way(self, hessian2_params):
        report = jensen_conditions(triple_from_radial(B_ONE), hessian2_params)
        assert report.implied_by == {
            "envelope_growth_divergence": "radial_moment_divergence",
            "oscillation_moment_bound": "oscillation_smallness",
        }
        # No reverse directions are ever claimed.
        assert "radial_moment_divergence" not in report.implied_by
        assert "oscillation_smallness" not in report.implied_by
