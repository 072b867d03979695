import math

import numpy as np
import pytest
from scipy.integrate import quad

from parisian_dividends import (
    ControlParams,
    DegenerateRootsError,
    DomainError,
    ExpSum,
    LevyModel,
    ModelError,
    laplace_exponent,
    laplace_exponent_roots,
    optimal_pair,
    parisian_scale,
    right_inverse,
    scale_function,
)

from conftest import ALL_MODELS, CL_PARAMS, M_BM, M_CL, M_MIX_BV, M_MIX_UBV, RATE_COMBOS


def psi_raw(model, theta):
    """Closed-form Laplace exponent valid for any theta off the poles (test oracle)."""
    out = model.mu * theta + 0.5 * model.sigma**2 * theta**2
    for w, a in zip(model.jump_weights, model.jump_rates):
        out += model.jump_rate * w * (a / (a + theta) - 1.0)
    return out


def bisection_root_scan(model, r):
    """Independent root oracle: sign scan on a fine grid between poles, then bisection."""
    poles = sorted(-a for a in model.jump_rates)
    lo = (poles[0] if poles else 0.0) - 30.0
    hi = right_inverse(model, r) + 1.0
    grid = np.linspace(lo, hi, 40001)
    # keep clear of the poles where psi blows up
    for pole in poles:
        grid = grid[np.abs(grid - pole) > 2e-3]
    vals = np.array([psi_raw(model, t) - r for t in grid])
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        a, b = grid[i], grid[i + 1]
        fa = psi_raw(model, a) - r
        for _ in range(80):
            m = 0.5 * (a + b)
            fm = psi_raw(model, m) - r
            if (fm > 0) == (fa > 0):
                a, fa = m, fm
            else:
                b = m
        roots.append(0.5 * (a + b))
    return sorted(roots, reverse=True)


class TestRoots:
    def test_brownian_pair(self):
        roots = laplace_exponent_roots(M_BM, 0.14)
        assert roots[0] == pytest.approx(math.sqrt(0.14), abs=1e-12)
        assert roots[1] == pytest.approx(-math.sqrt(0.14), abs=1e-12)

    def test_cl_quadratic_oracle(self):
        roots = laplace_exponent_roots(M_CL, 0.1)
        disc = math.sqrt(0.56)
        assert roots[0] == pytest.approx((-0.4 + disc) / 2.0, abs=1e-12)
        assert roots[1] == pytest.approx((-0.4 - disc) / 2.0, abs=1e-12)

    def test_count_and_brackets_sigma_mixture(self):
        # sigma > 0 and two mixture components: exactly 4 real roots
        for r in (0.05, 0.3, 2.0):
            roots = laplace_exponent_roots(M_MIX_UBV, r)
            assert roots.size == 4
            oracle = bisection_root_scan(M_MIX_UBV, r)
            assert len(oracle) == 4
            for got, want in zip(roots, oracle):
                assert got == pytest.approx(want, abs=1e-6)

    def test_count_bounded_variation(self):
        assert laplace_exponent_roots(M_CL, 0.1).size == 2
        assert laplace_exponent_roots(M_MIX_BV, 0.1).size == 3

    def test_residuals(self):
        for model in ALL_MODELS.values():
            for r in (1e-3, 0.1, 1.0, 10.0):
                roots = laplace_exponent_roots(model, r)
                for t in roots:
                    assert abs(psi_raw(model, t) - r) <= 1e-10 * max(1.0, r)

    def test_domain(self):
        with pytest.raises(DomainError):
            laplace_exponent_roots(M_CL, 0.0)
        with pytest.raises(DomainError):
            laplace_exponent_roots(M_CL, -1.0)


class TestExpSum:
    def test_eval_matches_manual(self):
        s = ExpSum(np.array([1.5, -0.25]), np.array([0.3, -0.7]))
        x = 1.234
        manual = 1.5 * math.exp(0.3 * x) - 0.25 * math.exp(-0.7 * x)
        assert s.value(x) == pytest.approx(manual, rel=1e-15)
        xs = np.linspace(-1, 3, 7)
        np.testing.assert_allclose(s.value(xs), [s.value(float(v)) for v in xs], rtol=1e-14)

    def test_derivative_termwise(self):
        s = ExpSum(np.array([2.0, 1.0]), np.array([0.5, -1.2]))
        d = s.derivative()
        assert d.value(0.7) == pytest.approx(2.0 * 0.5 * math.exp(0.35) - 1.2 * math.exp(-0.84),
                                             rel=1e-14)
        assert s.value(0.7, deriv=1) == pytest.approx(d.value(0.7), rel=1e-15)

    def test_degenerate_exponents_rejected(self):
        with pytest.raises(DegenerateRootsError):
            ExpSum(np.array([1.0, 1.0]), np.array([0.5, 0.5 + 1e-10]))

    def test_laplace_transform(self):
        s = ExpSum(np.array([1.0]), np.array([-0.5]))
        # int_0^inf e^{-theta x} e^{-0.5 x} dx = 1 / (theta + 0.5)
        assert s.laplace_transform(2.0) == pytest.approx(1.0 / 2.5, rel=1e-14)
        with pytest.raises(DomainError):
            s.laplace_transform(-0.5)


class TestScaleFunctionW:
    def test_brownian_closed_form(self):
        w = scale_function(M_BM, 0.04)
        for x in (0.3, 1.0, 2.5):
            assert w.value(x) == pytest.approx(math.sinh(0.2 * x) / 0.2, rel=1e-12)

    def test_initial_value(self):
        # 1/mu for bounded variation, 0 for unbounded variation
        assert scale_function(M_CL, 0.1).value(0.0) == pytest.approx(1.0, abs=1e-10)
        assert scale_function(M_MIX_BV, 0.1).value(0.0) == pytest.approx(1.0 / 1.2, abs=1e-10)
        assert abs(scale_function(M_MIX_UBV, 0.1).value(0.0)) <= 1e-10
        assert abs(scale_function(M_BM, 0.04).value(0.0)) <= 1e-10

    def test_laplace_transform_roundtrip(self):
        for model in ALL_MODELS.values():
            for q in (0.05, 0.5):
                w = scale_function(model, q)
                phi_q = right_inverse(model, q)
                for shift in (0.5, 1.0, 2.0):
                    theta = phi_q + shift
                    assert w.laplace_transform(theta) == pytest.approx(
                        1.0 / (laplace_exponent(model, theta) - q), abs=1e-10, rel=1e-10)

    def test_positive_and_increasing(self):
        xs = np.linspace(0.01, 8.0, 300)
        for model in ALL_MODELS.values():
            w = scale_function(model, 0.1)
            vals = w.value(xs)
            assert (vals > 0).all()
            assert (np.diff(vals) > 0).all()

    def test_q_zero_positive_drift(self):
        w = scale_function(M_CL, 0.0)
        assert w.value(0.0) == pytest.approx(1.0, abs=1e-10)
        # at q=0 the transform identity still holds
        theta = 1.3
        assert w.laplace_transform(theta) == pytest.approx(
            1.0 / laplace_exponent(M_CL, theta), rel=1e-10)

    def test_q_zero_nonpositive_drift_rejected(self):
        heavy = LevyModel(mu=0.5, sigma=0.0, jump_rate=1.0, jump_weights=(1.0,),
                          jump_rates=(1.0,))
        with pytest.raises(ModelError):
            scale_function(heavy, 0.0)


class TestParisianScale:
    def test_value_at_zero_battery(self):
        for model in ALL_MODELS.values():
            for q, p in RATE_COMBOS:
                z = parisian_scale(model, ControlParams(q=q, p=p, beta=0.1))
                assert z.value(0.0) == pytest.approx(1.0, abs=1e-10)

    def test_negative_side_exponential(self):
        for model in ALL_MODELS.values():
            for q, p in RATE_COMBOS:
                z = parisian_scale(model, ControlParams(q=q, p=p, beta=0.1))
                phi_pq = right_inverse(model, p + q)
                assert z.neg_exponent == pytest.approx(phi_pq, rel=1e-13)
                for x in (-0.5, -1.0, -3.0):
                    assert z.value(x) == pytest.approx(math.exp(phi_pq * x), rel=1e-12)

    def test_brownian_negative_value(self):
        z = parisian_scale(M_BM, ControlParams(q=0.04, p=0.1, beta=0.1))
        assert z.value(-2.0) == pytest.approx(math.exp(-2.0 * math.sqrt(0.14)), rel=1e-12)
        assert z.value(-2.0) == pytest.approx(0.473130, abs=5e-7)

    def test_c1_at_zero_when_sigma_positive(self):
        for model in (M_BM, M_MIX_UBV):
            z = parisian_scale(model, ControlParams(q=0.05, p=0.2, beta=0.1))
            assert abs(z.deriv(0.0, 1) - z.neg_exponent) <= 1e-8

    def test_quadrature_oracle(self, cl_scale):
        # Z(x) = p * int_0^inf e^{-phi_pq y} W(x+y) dy, quadrature on the defining integral
        w = scale_function(M_CL, CL_PARAMS.q)
        phi_pq = cl_scale.neg_exponent

        def z_by_quadrature(x):
            def integrand(y):
                return math.exp(-phi_pq * y) * w.value(x + y)

            lo = max(0.0, -x)
            val, _ = quad(integrand, lo, np.inf, epsabs=1e-12, epsrel=1e-11, limit=300)
            return CL_PARAMS.p * val

        for x in (-1.0, 0.0, 0.7, 3.0):
            assert cl_scale.value(x) == pytest.approx(z_by_quadrature(x), rel=1e-8)

    def test_quadrature_oracle_ubv(self):
        params = ControlParams(q=0.05, p=0.2, beta=0.1)
        z = parisian_scale(M_MIX_UBV, params)
        w = scale_function(M_MIX_UBV, params.q)

        def z_by_quadrature(x):
            lo = max(0.0, -x)
            val, _ = quad(lambda y: math.exp(-z.neg_exponent * y) * w.value(x + y),
                          lo, np.inf, epsabs=1e-12, epsrel=1e-11, limit=300)
            return params.p * val

        for x in (-1.0, 0.0, 0.7, 3.0):
            assert z.value(x) == pytest.approx(z_by_quadrature(x), rel=1e-8)

    def test_partial_fraction_identity(self):
        # sum_j p / (psi'(theta_j) (phi_pq - theta_j)) == 1, i.e. the positive piece at 0
        for model in ALL_MODELS.values():
            for q, p in RATE_COMBOS:
                z = parisian_scale(model, ControlParams(q=q, p=p, beta=0.1))
                assert z.pos_part.value(0.0) == pytest.approx(1.0, abs=1e-10)

    def test_derivative_negative_side(self, cl_scale):
        phi_pq = cl_scale.neg_exponent
        assert cl_scale.deriv(-1.0, 1) == pytest.approx(phi_pq * math.exp(-phi_pq), rel=1e-13)
        assert cl_scale.deriv(-1.0, 2) == pytest.approx(phi_pq**2 * math.exp(-phi_pq), rel=1e-13)

    def test_derivative_finite_difference(self, cl_scale, cl_solution):
        h = 1e-5
        for x in (0.5, 2.0, cl_solution.b_star, cl_solution.b_star + 1.0):
            fd = (cl_scale.value(x + h) - cl_scale.value(x - h)) / (2 * h)
            d = cl_scale.deriv(x, 1)
            assert abs(d - fd) <= 1e-6 * max(1.0, abs(d))

    def test_strictly_increasing(self, cl_scale):
        for x in (-5.0, -1.0, 0.0, 1.0, 5.0):
            assert cl_scale.deriv(x, 1) > 0
        xs = np.linspace(-4.0, 8.0, 500)
        assert (np.diff(cl_scale.value(xs)) > 0).all()

    def test_log_convexity_of_derivative(self, cl_scale, cl_solution):
        xs = np.linspace(1e-3, 2 * cl_solution.b_star, 400)
        log_zp = np.log(cl_scale.deriv(xs, 1))
        second = log_zp[2:] - 2 * log_zp[1:-1] + log_zp[:-2]
        assert second.min() >= -1e-8

    def test_eval_dispatch(self, cl_scale):
        assert cl_scale.eval(0.5) == cl_scale.value(0.5)
        assert cl_scale.eval(0.5, deriv=2) == cl_scale.deriv(0.5, 2)
        with pytest.raises(DomainError):
            cl_scale.deriv(0.5, 3)
