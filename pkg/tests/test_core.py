"""Combinatorics, radial sigma_j collapse, parameter/grid validation."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hessianls.core import (
    ProblemParams,
    RadialCurve,
    RadialGrid,
    binomial,
    binomial_or_zero,
    gamma_k_membership,
    sigma_j_radial,
)
from hessianls.errors import ParameterError


class TestBinomial:
    def test_oracle_values(self):
        assert binomial(5, 2) == 10
        assert binomial(10, 0) == 1
        assert binomial(7, 7) == 1
        assert binomial(64, 32) == math.comb(64, 32)
        assert isinstance(binomial(64, 32), int)

    def test_rejects_k_above_n(self):
        with pytest.raises(ParameterError):
            binomial(3, 4)

    def test_rejects_negative(self):
        with pytest.raises(ParameterError):
            binomial(-1, 0)
        with pytest.raises(ParameterError):
            binomial(3, -2)

    def test_or_zero_convention(self):
        assert binomial_or_zero(3, 5) == 0
        assert binomial_or_zero(3, 3) == 1
        with pytest.raises(ParameterError):
            binomial_or_zero(-1, 0)

    @given(st.integers(min_value=1, max_value=60), st.integers(min_value=1, max_value=60))
    def test_pascal_rule(self, n, k):
        k = min(k, n)
        assert binomial_or_zero(n, k) == binomial_or_zero(n - 1, k) + binomial_or_zero(
            n - 1, k - 1
        )


class TestSigmaJRadial:
    def test_identity_spectrum_collapse(self):
        # When u'' equals u'/r the spectrum is t * Id and sigma_j must be
        # C(n, j) t^j.
        for n in (3, 5, 8):
            for j in range(1, n + 1):
                for t in (0.3, 1.0, 2.5):
                    expected = math.comb(n, j) * t**j
                    assert sigma_j_radial(j, t, t, n) == pytest.approx(expected, rel=1e-14)

    def test_laplacian_case(self):
        # j = 1 is the Laplacian: u'' + (n-1) u'/r.
        assert sigma_j_radial(1, 2.0, 2.0, 3) == pytest.approx(6.0)
        assert sigma_j_radial(1, 1.0, 0.5, 4) == pytest.approx(1.0 + 3 * 0.5)

    def test_exact_power_spectrum(self):
        # u = C r^3 with C = 1/45 in n = 3: at r = 1, u'' = 6C, u'/r = 3C,
        # and sigma_2 = C(2,2)(3C)^2 + C(2,1)(6C)(3C) = 9C^2 + 36C^2 = 45C^2.
        C = 1.0 / 45.0
        val = sigma_j_radial(2, 6 * C, 3 * C, 3)
        assert val == pytest.approx(45 * C**2, rel=1e-14)
        assert val == pytest.approx(C, rel=1e-14)

    def test_top_order_is_determinant(self):
        # j = n: C(n-1, n) = 0 so sigma_n = u'' (u'/r)^(n-1), the product of
        # all eigenvalues.
        assert sigma_j_radial(3, 2.0, 0.5, 3) == pytest.approx(2.0 * 0.25)

    def test_vectorized(self):
        d2u = np.array([1.0, 2.0, 3.0])
        t = np.array([1.0, 1.0, 2.0])
        out = sigma_j_radial(2, d2u, t, 4)
        expected = 3 * t**2 + 3 * d2u * t
        np.testing.assert_allclose(out, expected, rtol=1e-15)

    def test_rejects_bad_order(self):
        with pytest.raises(ParameterError):
            sigma_j_radial(0, 1.0, 1.0, 3)
        with pytest.raises(ParameterError):
            sigma_j_radial(4, 1.0, 1.0, 3)

    @given(
        st.integers(min_value=3, max_value=9),
        st.floats(min_value=-2.0, max_value=2.0),
        st.floats(min_value=0.05, max_value=2.0),
    )
    def test_matches_symmetric_polynomial(self, n, d2u, t):
        # Cross-check against the elementary symmetric polynomial of the
        # explicit spectrum (d2u, t, ..., t) computed via np.poly.
        eigs = np.array([d2u] + [t] * (n - 1))
        coeffs = np.poly(eigs)  # prod (x - eig): e_j = (-1)^j coeffs[j]
        for j in range(1, n + 1):
            expected = (-1) ** j * coeffs[j]
            got = sigma_j_radial(j, d2u, t, n)
            assert got == pytest.approx(expected, rel=1e-10, abs=1e-10)


class TestProblemParams:
    def test_valid(self):
        p = ProblemParams(n=4, k=2, gamma=1.5, a=2.0)
        assert p.cnk == 6
        assert p.sub_power == pytest.approx(0.25)

    def test_with_center(self):
        p = ProblemParams(n=3, k=1, gamma=0.5, a=1.0)
        q = p.with_center(7.0)
        assert q.a == 7.0 and q.n == p.n and q.k == p.k and q.gamma == p.gamma

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(n=2, k=1, gamma=0.5),
            dict(n=3, k=0, gamma=0.5),
            dict(n=3, k=4, gamma=0.5),
            dict(n=3, k=1, gamma=0.0),
            dict(n=3, k=1, gamma=1.0),  # gamma must be strictly below k
            dict(n=3, k=1, gamma=-0.5),
            dict(n=3, k=1, gamma=0.5, a=0.0),
            dict(n=3, k=1, gamma=0.5, a=-1.0),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ParameterError):
            ProblemParams(**{"a": 1.0, **kwargs})

    def test_non_integer_orders_rejected(self):
        with pytest.raises(ParameterError):
            ProblemParams(n=3.0, k=1, gamma=0.5)
        with pytest.raises(ParameterError):
            ProblemParams(n=3, k=1.5, gamma=0.5)


class TestRadialGrid:
    def test_build_shape(self):
        g = RadialGrid.build(1e4, r_lin=10.0, nodes_per_decade=48)
        r = g.nodes
        assert r[0] == 0.0
        assert r[-1] == 1e4
        assert np.all(np.diff(r) > 0)
        # Linear head: uniform spacing up to r_lin.
        head = r[r <= 10.0 + 1e-12]
        np.testing.assert_allclose(np.diff(head), head[1], rtol=1e-12)
        # Log tail: roughly nodes_per_decade per decade.
        tail = r[r >= 10.0]
        ratios = tail[1:] / tail[:-1]
        np.testing.assert_allclose(ratios[:-1], ratios[0], rtol=1e-6)
        per_decade = 1.0 / math.log10(ratios[0])
        assert per_decade == pytest.approx(48, rel=0.05)

    def test_build_short_domain(self):
        g = RadialGrid.build(2.0, r_lin=10.0)
        assert g.r_max == 2.0
        # Entire grid is linear when r_max <= r_lin.
        np.testing.assert_allclose(np.diff(g.nodes), g.nodes[1], rtol=1e-12)

    def test_invalid(self):
        with pytest.raises(ParameterError):
            RadialGrid.build(-1.0)
        with pytest.raises(ParameterError):
            RadialGrid.build(10.0, nodes_per_decade=2)
        with pytest.raises(ParameterError):
            RadialGrid(np.array([0.0, 1.0, 1.0]))
        with pytest.raises(ParameterError):
            RadialGrid(np.array([0.5, 1.0]))

    def test_refined_contains_original(self):
        g = RadialGrid.build(1e3, nodes_per_decade=16)
        fine = g.refined(4)
        assert fine.size > len(g)
        assert np.all(np.diff(fine) > 0)
        # Original nodes survive refinement.
        for r in g.nodes:
            assert np.any(np.isclose(fine, r, rtol=1e-13, atol=1e-300))

    def test_refined_factor_one_is_identity(self):
        g = RadialGrid.build(100.0)
        assert g.refined(1) is g.nodes

    @given(
        st.floats(min_value=0.5, max_value=1e6),
        st.integers(min_value=4, max_value=64),
    )
    def test_build_properties(self, r_max, npd):
        g = RadialGrid.build(r_max, nodes_per_decade=npd)
        assert g.nodes[0] == 0.0
        assert g.nodes[-1] == pytest.approx(r_max, rel=0, abs=0)
        assert np.all(np.diff(g.nodes) > 0)


class TestRadialCurve:
    def test_du_over_r_origin_limit(self):
        g = RadialGrid(np.array([0.0, 1.0, 2.0]))
        c = RadialCurve(g, u=[1.0, 1.5, 3.0], du=[0.0, 1.0, 2.0], d2u=[1.0, 1.0, 1.0])
        t = c.du_over_r()
        assert t[0] == 1.0  # identity limit u''(0)
        assert t[1] == 1.0
        assert t[2] == 1.0

    def test_shape_mismatch(self):
        g = RadialGrid(np.array([0.0, 1.0]))
        with pytest.raises(ParameterError):
            RadialCurve(g, u=[1.0, 2.0, 3.0], du=[0.0, 1.0], d2u=[1.0, 1.0])

    def test_membership_quadratic(self):
        # u = 1 + r^2 has Hessian 2*Id: inside every cone.
        g = RadialGrid.build(10.0)
        r = g.nodes
        c = RadialCurve(g, u=1 + r**2, du=2 * r, d2u=np.full_like(r, 2.0))
        for k in (1, 2, 3):
            p = ProblemParams(n=3, k=k, gamma=0.5 * k)
            assert gamma_k_membership(c, p).all()

    def test_membership_detects_concavity(self):
        # u with u'' < 0 somewhere fails k = 2 (sigma_2 needs both terms).
        g = RadialGrid(np.array([0.0, 1.0, 2.0, 3.0]))
        r = g.nodes
        u = np.sqrt(1 + r**2)
        du = r / u
        d2u = 1 / u**3 - 1e-2 - 0 * r
        d2u[2:] = -0.5
        c = RadialCurve(g, u=u, du=du, d2u=d2u)
        p = ProblemParams(n=4, k=2, gamma=1.0)
        ok = gamma_k_membership(c, p)
        assert not ok.all()
        assert ok[0]  # positive at the center

    def test_membership_monotone_in_k(self):
        # Cone order k membership implies membership for every j <= k, so
        # failing at small k means failing at larger k too.
        g = RadialGrid(np.array([0.0, 0.5, 1.0, 2.0]))
        r = g.nodes
        u = 1 + r**2 - 0.3 * r**3
        du = 2 * r - 0.9 * r**2
        d2u = 2 - 1.8 * r
        c = RadialCurve(g, u=u, du=du, d2u=d2u)
        masks = {}
        for k in (1, 2, 3):
            p = ProblemParams(n=4, k=k, gamma=0.5 * k)
            masks[k] = gamma_k_membership(c, p)
        assert np.all(masks[2] <= masks[1])
        assert np.all(masks[3] <= masks[2])
