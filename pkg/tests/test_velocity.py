"""
Tests for the velocity catalog and the assumption checker
"""

import math

import numpy as np
import pytest

from app.engine.velocity import (
    AssumptionChecker, check_assumptions, eval_d2v, eval_dv, eval_v, ob2_threshold, validity_interval,
)
from app.schemas.velocity_schema import PiecewisePolynomial, VelocityFamily, VelocityModel
from app.utils.exceptions import DomainError

CATALOG = [
    VelocityModel.greenshields(1.0, 1.0),
    VelocityModel.underwood(1.0, 1.0),
    VelocityModel.gen_greenshields(1.0, 1.0, 2),
    VelocityModel.gen_greenshields(2.0, 1.5, 3),
    VelocityModel.gen_california(1.0, 1.0, 0.5),
    VelocityModel.gen_california(1.0, 1.0, 0.3, regularized=True),
    VelocityModel.greenberg(1.0, 1.0),
]


def custom_parabola() -> VelocityModel:
    """V = 1 - xi + xi^2 on [0, 1]"""
    return VelocityModel(
        family=VelocityFamily.CUSTOM,
        custom=PiecewisePolynomial(knots=[0.0, 1.0], v=[[1.0, -1.0, 1.0]], dv=[[-1.0, 2.0]], d2v=[[2.0]]),
    )


class TestEvaluation:

    def test_greenshields_closed_form(self):
        model = VelocityModel.greenshields(2.0, 4.0)
        assert eval_v(model, 1.0) == pytest.approx(1.5)
        assert eval_dv(model, 3.0) == pytest.approx(-0.5)
        assert eval_d2v(model, 3.0) == 0.0

    def test_greenberg_vanishes_at_rho_max(self):
        assert eval_v(VelocityModel.greenberg(1.0, 1.0), 1.0) == pytest.approx(0.0, abs=1e-15)

    def test_array_in_array_out(self):
        out = eval_v(VelocityModel.underwood(), np.array([0.0, 1.0]))
        assert isinstance(out, np.ndarray)
        np.testing.assert_allclose(out, [1.0, math.exp(-1.0)])

    @pytest.mark.parametrize("model", CATALOG, ids=lambda m: m.describe())
    def test_derivatives_match_finite_differences(self, model):
        """
        Test: V' and V'' agree with central differences at interior densities
        """
        h = 1e-5
        for xi in (0.3, 0.5, 0.8):
            fd1 = (eval_v(model, xi + h) - eval_v(model, xi - h)) / (2 * h)
            fd2 = (eval_dv(model, xi + h) - eval_dv(model, xi - h)) / (2 * h)
            assert eval_dv(model, xi) == pytest.approx(fd1, rel=1e-6, abs=1e-8)
            assert eval_d2v(model, xi) == pytest.approx(fd2, rel=1e-6, abs=1e-8)

    def test_custom_piecewise_polynomial(self):
        model = custom_parabola()
        assert eval_v(model, 0.5) == pytest.approx(0.75)
        assert eval_dv(model, 0.5) == pytest.approx(0.0)
        assert eval_d2v(model, 0.5) == pytest.approx(2.0)


class TestValidity:

    def test_greenberg_singular_at_zero(self):
        with pytest.raises(DomainError):
            eval_v(VelocityModel.greenberg(), 0.0)

    def test_california_singular_at_zero(self):
        with pytest.raises(DomainError):
            eval_v(VelocityModel.gen_california(), np.array([0.0, 0.5]))

    def test_regularized_california_finite_at_zero_derivative_not(self):
        """
        Test: the shifted variant evaluates at 0 but its derivatives do not
        """
        model = VelocityModel.gen_california(1.0, 1.0, 0.5, regularized=True)
        assert math.isfinite(eval_v(model, 0.0))
        assert validity_interval(model, 0)[2] is False
        assert validity_interval(model, 1)[2] is True
        with pytest.raises(DomainError):
            eval_dv(model, 0.0)

    def test_custom_outside_knots(self):
        with pytest.raises(DomainError):
            eval_v(custom_parabola(), 1.5)

    def test_domain_error_is_value_error(self):
        with pytest.raises(ValueError):
            eval_v(VelocityModel.greenberg(), -1.0)


class TestAssumptionChecker:

    def test_greenshields_is_linear_everywhere(self):
        rep = check_assumptions(VelocityModel.greenshields(1.0, 1.0), 0.0, 1.0)
        assert rep.linear
        assert rep.delta == pytest.approx(1.0)
        assert rep.kappa_w == pytest.approx(1.0)
        assert rep.kappa_w_source == "delta"

    def test_greenshields_ob2_needs_narrow_range(self):
        """
        Test: (M - m) <= xi on [m, M] holds iff m >= M/2
        """
        model = VelocityModel.greenshields(1.0, 1.0)
        assert check_assumptions(model, 0.6, 1.0).ob2
        assert check_assumptions(model, 0.6, 1.0).kappa_g == pytest.approx(1.0)
        wide = check_assumptions(model, 0.3, 1.0)
        assert not wide.ob2
        assert wide.kappa_g is None
        assert not wide.g_bound_available

    def test_greenberg_zero_h(self):
        rep = check_assumptions(VelocityModel.greenberg(1.0, 1.0), 0.2, 1.0)
        assert rep.greenberg_zero_h
        assert rep.g_bound_available
        assert rep.kappa_g == pytest.approx(1.0)

    def test_underwood_full_range_has_no_bound(self):
        rep = check_assumptions(VelocityModel.underwood(1.0, 1.0), 0.0, 1.0)
        assert not rep.linear and not rep.conv_more
        assert not rep.ob2 and not rep.ob3
        assert rep.kappa_w is None and rep.kappa_g is None

    def test_underwood_narrow_range_satisfies_ob2(self):
        rep = check_assumptions(VelocityModel.underwood(1.0, 1.0), 0.4, 1.0)
        assert rep.ob2
        assert rep.kappa_g_source == "ob2"
        assert rep.kappa_w is None

    def test_strictly_decreasing_constant(self):
        rep = check_assumptions(VelocityModel.underwood(1.0, 1.0), 0.0, 1.0)
        assert rep.strictly_decreasing_kappa2 == pytest.approx(math.exp(-1.0), rel=1e-9)

    def test_flags_survive_narrower_ranges(self):
        """
        Test: a hypothesis certified on [m, M] stays certified on every subrange
        """
        ranges = [(0.2, 1.0), (0.4, 1.0), (0.6, 1.0), (0.7, 0.9)]
        flags = ("linear", "conv_more", "ob2", "ob3", "greenberg_zero_h")
        models = [
            VelocityModel.greenshields(1.0, 1.0),
            VelocityModel.underwood(1.0, 1.0),
            VelocityModel.gen_greenshields(1.0, 1.0, 2),
            VelocityModel.gen_california(1.0, 1.0, 0.5),
            VelocityModel.greenberg(1.0, 1.0),
        ]
        for model in models:
            reports = [check_assumptions(model, m, M) for m, M in ranges]
            for wide, narrow in zip(reports, reports[1:]):
                for flag in flags:
                    if getattr(wide, flag):
                        assert getattr(narrow, flag), f"{model.describe()}: {flag} lost on [{narrow.m}, {narrow.M}]"

    def test_gen_california_satisfies_ob3(self):
        """
        Test: V'' xi = -(1 + alpha) V', so kappa1 = 1 - alpha on any range
        """
        rep = check_assumptions(VelocityModel.gen_california(1.0, 1.0, 0.5), 0.2, 1.0)
        assert rep.ob3
        assert rep.ob3_kappa1 == pytest.approx(0.5, abs=1e-8)
        assert rep.kappa_g_source == "ob3"
        assert not rep.ob2

    def test_gen_california_conv_more_on_narrow_range(self):
        model = VelocityModel.gen_california(1.0, 1.0, 0.5)
        rep = check_assumptions(model, 0.8, 1.0)
        assert rep.conv_more
        assert rep.kappa_w == pytest.approx(0.5 - 0.25 * 0.8 ** -1.5, rel=1e-6)
        assert rep.kappa_w_source == "kappa2-kappa1"
        assert not check_assumptions(model, 0.2, 1.0).conv_more

    def test_rejects_bad_range(self):
        with pytest.raises(ValueError):
            check_assumptions(VelocityModel.greenshields(), 0.8, 0.2)
        with pytest.raises(ValueError):
            AssumptionChecker(samples=1)

    def test_summary_lists_flags(self):
        text = check_assumptions(VelocityModel.greenshields(), 0.6, 1.0).summary()
        assert "linear" in text and "ob2" in text


class TestOb2Threshold:

    def test_greenshields_half(self):
        assert ob2_threshold(VelocityModel.greenshields(1.0, 1.0), 1.0) == pytest.approx(0.5, abs=1e-6)

    def test_underwood(self):
        """
        Test: (1 - m)^2 <= m gives m/M >= (3 - sqrt 5)/2 at M = 1

        The value (3 - sqrt 8)/2 that is sometimes quoted for Underwood
        violates this inequality; the checker follows the inequality.
        """
        expected = (3.0 - math.sqrt(5.0)) / 2.0
        assert ob2_threshold(VelocityModel.underwood(1.0, 1.0), 1.0) == pytest.approx(expected, abs=1e-6)

    def test_gen_greenshields(self):
        threshold = ob2_threshold(VelocityModel.gen_greenshields(1.0, 1.0, 2), 1.0)
        assert threshold == pytest.approx(2.0 / 3.0, abs=1e-6)
