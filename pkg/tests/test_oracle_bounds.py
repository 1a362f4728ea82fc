import math
import warnings

import numpy as np
import pytest

from levywave.fields import Coefficient, Constant, Scenario
from levywave.levy_measure import DiracMixture, GammaMeasure, TabulatedMeasure, InfiniteMomentError
from levywave.oracle_bounds import (BoundConstants, ConstantKernel, LinearKernel, TabulatedKernel,
                                    bound_constants, crossing_time, kernel_from_dict, linear_second_moment,
                                    lipschitz_floor, lower_bound_moment, rosenthal_check,
                                    rosenthal_slope_probe, upper_bound_moment, volterra_solve)
from levywave.prm import StepFunction, TruncationPolicy

GAMMA = GammaMeasure(1, 1)
UNIT_POISSON = DiracMixture.from_pairs([(1, 1)])
SQUARE = StepFunction.indicator(0, 1, 0, 1)
COSH_ROOT2 = 2.1781835566085710   # cosh(sqrt 2)
COSH_INV_ROOT2 = 1.2605918365213562  # cosh(1/sqrt 2)


class TestVolterra:
    def test_zero_kernel(self):
        sol = volterra_solve(2.0, ConstantKernel(0.0), 1.0, 0.01)
        assert np.all(sol.f == 2.0)

    def test_constant_kernel_is_exponential(self):
        sol = volterra_solve(1.0, ConstantKernel(1.0), 1.0, 1e-3)
        assert sol.f[-1] == pytest.approx(math.e, abs=1e-4)

    def test_linear_kernel_is_cosh(self):
        sol = volterra_solve(1.0, LinearKernel(0.5), 2.0, 1e-3)
        assert sol.f[-1] == pytest.approx(COSH_ROOT2, abs=1e-4)

    def test_second_order(self):
        errs = []
        for d in (1e-3, 5e-4):
            sol = volterra_solve(1.0, LinearKernel(0.5), 5.0, d)
            errs.append(np.max(np.abs(sol.f - linear_second_moment(1.0, 1.0, 1.0, sol.t))))
        assert errs[0] <= 1e-4
        assert 4 * 0.7 <= errs[0] / errs[1] <= 4 * 1.3

    def test_tabulated_kernel_agrees(self):
        ts = np.linspace(0, 2, 3)
        a = volterra_solve(1.5, TabulatedKernel(tuple(ts), tuple(0.5 * ts)), 2.0, 1e-3)
        b = volterra_solve(1.5, LinearKernel(0.5), 2.0, 1e-3)
        assert np.allclose(a.f, b.f, rtol=1e-13)

    def test_starts_at_forcing_and_increases(self):
        sol = volterra_solve(0.7, TabulatedKernel((0.0, 1.0, 3.0), (0.0, 2.0, 0.5)), 3.0, 1e-2)
        assert sol.f[0] == 0.7 and np.all(np.diff(sol.f) >= 0)

    def test_grid_mismatch(self):
        with pytest.raises(ValueError):
            volterra_solve(1.0, LinearKernel(1.0), 1.0, 0.3)

    def test_kernel_dict(self):
        for k in (LinearKernel(0.5), ConstantKernel(2.0), TabulatedKernel((0.0, 1.0), (1.0, 0.0))):
            assert kernel_from_dict(k.to_dict()) == k
        with pytest.raises(ValueError):
            kernel_from_dict({"kind": "linear", "c": 1, "rate": 2})


class TestClosedForms:
    def test_linear_second_moment(self):
        assert linear_second_moment(2.0, 1.0, 1.0, 0.0) == 4.0
        assert linear_second_moment(1.0, 1.0, 1.0, 1.0) == pytest.approx(COSH_INV_ROOT2, rel=1e-14)
        assert np.all(linear_second_moment(1.5, 0.0, 1.0, np.linspace(0, 9, 5)) == 2.25)

    def test_volterra_cross_check(self):
        sol = volterra_solve(1.0, LinearKernel(0.5), 1.0, 1e-3)
        assert sol.f[-1] == pytest.approx(linear_second_moment(1, 1, 1, 1.0), abs=1e-4)

    def test_lower_bound(self):
        assert np.all(lower_bound_moment(2.0, 0.0, 1.0, np.array([0, 3.0])) == 2.0)
        assert lower_bound_moment(2.0, 1.0, 2.0, 3.0) == pytest.approx(2 * math.e ** 3, rel=1e-14)
        assert lower_bound_moment(2.0, 1.0, 2.0, 3.0) == pytest.approx(40.171, abs=1e-3)

    def test_ratio_tends_to_one(self):
        t = np.array([1.0, 5.0, 10.0, 20.0])
        r = linear_second_moment(1.3, 0.8, 2.0, t) / lower_bound_moment(1.3, 0.8, 2.0, t)
        assert np.all(r > 1) and np.all(np.diff(r) < 0) and r[-1] - 1 < 1e-6

    def test_crossing_time(self):
        t = np.linspace(0, 5, 51)
        exact = linear_second_moment(1.0, 1.0, 1.0, t)
        assert crossing_time(t, exact, lower_bound_moment(1.0, 1.0, 1.0, t)) == 0.0
        assert crossing_time(t, 0.45 + 0.2 * t, np.full(51, 1.0)) == pytest.approx(2.8)
        assert crossing_time(t, np.ones(51), np.full(51, 2.0)) == math.inf


class TestBoundConstants:
    def test_arithmetic(self):
        c = BoundConstants(K=1.0, L=1.0, C0=1.0, m2=1.0)
        assert c.gamma == pytest.approx(1.317668, abs=1e-6)
        assert c.L1 == pytest.approx(3.135335, abs=1e-6)
        assert c.L2 == 9.0

    def test_envelope_values(self):
        c = BoundConstants(K=1.0, L=1.0, C0=1.0, m2=1.0)
        nu = DiracMixture.from_pairs([(1, 1)])  # m2 = m_p = 1
        assert upper_bound_moment(c, nu, 2, 0.0).value == pytest.approx(c.L1 ** 2)
        assert upper_bound_moment(c, nu, 2, 1.0).log_value == pytest.approx(2 * math.log(c.L1) + 18)

    def test_beta(self):
        c = BoundConstants(K=1.0, L=1.0, C0=1.0, m2=1.0)
        assert c.beta(GAMMA, 4) == pytest.approx(math.sqrt(4 ** 2 * 6 * 9 ** 4))

    def test_log_space_survives_overflow(self):
        c = BoundConstants(K=1.0, L=2.0, C0=3.0, m2=1.0)
        b = upper_bound_moment(c, GAMMA, 8, np.array([0.0, 10.0]))
        assert np.all(np.isfinite(b.log_value)) and b.value[-1] == math.inf

    def test_validation(self):
        with pytest.raises(ValueError):
            BoundConstants(K=1.0, L=1.0, C0=0.5, m2=1.0)
        with pytest.warns(UserWarning):
            c = BoundConstants(K=1.0, L=0.2, C0=1.0, m2=1.0)
        assert not c.in_proof_regime
        with pytest.raises(InfiniteMomentError):
            upper_bound_moment(BoundConstants(1.0, 1.0, 1.0, 1.0),
                               TabulatedMeasure((0.1, 1.0), (1.0, 1.0), tail_index=4.0), 4, 1.0)

    def test_floor(self):
        assert lipschitz_floor(4.0) == 0.25
        assert lipschitz_floor(0.5) > 0.5
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            c = bound_constants(Scenario(sigma=Coefficient.linear(0.1)), DiracMixture.from_pairs([(0.5, 1)]))
        assert c.in_proof_regime and c.L > 0.5

    @pytest.mark.parametrize("lam", [0.3, 1.0, 2.5])
    @pytest.mark.parametrize("a", [0.5, 1.0, 3.0])
    def test_envelope_dominates_exact_law(self, a, lam):
        s = Scenario(v0=Constant(a), sigma=Coefficient.linear(lam))
        c = bound_constants(s, GAMMA)
        assert c.K == a and c.L_sigma == lam
        t = np.linspace(0, 5, 101)
        assert np.all(upper_bound_moment(c, GAMMA, 2, t).log_value >= np.log(linear_second_moment(a, lam, 1.0, t)))

    def test_lower_envelope_after_crossing(self):
        t = np.linspace(0, 10, 201)
        exact = linear_second_moment(1.0, 0.8, 1.0, t)
        lower = lower_bound_moment(1.0, 0.8, 1.0, t)
        ts = crossing_time(t, exact, lower)
        assert np.all(lower[t >= ts] <= exact[t >= ts])


class TestRosenthal:
    def test_zero_integrand(self):
        r = rosenthal_check(StepFunction.indicator(0, 1, 0, 1, 0.0), GAMMA, None, 4, 1.0, 100)
        assert (r.lhs_p_norm, r.term_quadratic, r.term_jump, r.empirical_ratio) == (0, 0, 0, 0)

    def test_exact_terms(self):
        X = StepFunction.indicator(0, 1, 0, 2, 3.0)
        r = rosenthal_check(X, GAMMA, None, 4, 1.0, 200)
        assert r.term_quadratic == pytest.approx(math.sqrt(18))
        assert r.term_jump == pytest.approx(6 ** 0.25 * (81 * 2) ** 0.25)

    def test_doob_direction_at_p2(self):
        R = 20000
        r = rosenthal_check(SQUARE, UNIT_POISSON, None, 2, 1.0, R, seed=1)
        assert r.term_quadratic == 1.0 and r.term_jump == 1.0
        assert r.lhs_p_norm <= 2 * (1 + 4 / math.sqrt(R))
        assert r.empirical_ratio <= 1.0

    def test_gamma_p4_stable_when_doubling(self):
        a = rosenthal_check(SQUARE, GAMMA, None, 4, 1.0, 10 ** 4, seed=2)
        b = rosenthal_check(SQUARE, GAMMA, None, 4, 1.0, 2 * 10 ** 4, seed=3)
        assert abs(b.empirical_ratio / a.empirical_ratio - 1) <= 0.2

    def test_probe_consistency(self):
        probe = rosenthal_slope_probe(UNIT_POISSON, SQUARE, [2, 4], 1.0, 5000, seed=4)
        single = rosenthal_check(SQUARE, UNIT_POISSON, None, 2, 1.0, 5000, seed=4)
        assert probe[0] == (2.0, pytest.approx(single.empirical_ratio, rel=1e-12))
        assert rosenthal_slope_probe(UNIT_POISSON, SQUARE, [], 1.0, 10) == []

    def test_probe_growth_is_sublinear(self):
        probe = rosenthal_slope_probe(UNIT_POISSON, SQUARE, [2, 4, 6, 8], 1.0, 40000, seed=5)
        scaled = np.array([r / (p / math.log(p)) for p, r in probe])
        # beyond the first step the scaled ratio levels off
        assert np.all(scaled[2:] / scaled[1:-1] <= 1.25)
        assert scaled.max() / scaled.min() <= 2.0

    def test_suite_constant_is_respected(self):
        cases = [rosenthal_check(X, nu, None, p, 1.0, 5000, seed=6)
                 for X in (SQUARE, StepFunction.indicator(0, 1, -1, 1, 0.5))
                 for nu in (UNIT_POISSON, GAMMA) for p in (2, 4)]
        B = max(c.empirical_ratio for c in cases)
        assert all(c.lhs_p_norm <= B * (c.term_quadratic + c.term_jump) * (1 + 1e-12) for c in cases)

    def test_infinite_moment(self):
        nu = TabulatedMeasure((0.1, 1.0), (1.0, 1.0), tail_index=4.0)
        with pytest.raises(InfiniteMomentError):
            rosenthal_check(SQUARE, nu, TruncationPolicy(0.05), 4, 1.0, 10)
        with pytest.raises(InfiniteMomentError):
            rosenthal_slope_probe(nu, SQUARE, [2, 4], 1.0, 10)
