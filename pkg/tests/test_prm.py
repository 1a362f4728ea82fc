import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levywave.geometry import GridGeometry
from levywave.levy_measure import DiracMixture, GammaMeasure
from levywave.prm import (SmallJumps, StepFunction, TruncationPolicy, auto_cutoff, cell_variance,
                          compensated_increments, integrate_step, integrate_step_samples,
                          noise_increments, sample_points)
from levywave.streams import stream

UNIT_POISSON = DiracMixture.from_pairs([(1, 1)])
GAMMA = GammaMeasure(1, 1)
TWO_E1_AT_1 = 0.43876786879104058


def _within_var(samples, target, k=3.0):
    """Sample variance within k standard errors of ``target``."""
    c = samples - samples.mean()
    var = np.mean(c ** 2) * samples.size / (samples.size - 1)
    se = math.sqrt(max(np.mean(c ** 4) - var ** 2, 0.0) / samples.size)
    return abs(var - target) <= k * se, var, se


class TestTruncationPolicy:
    def test_auto_cutoff_meets_fraction(self):
        for frac in (1e-1, 1e-3, 1e-5):
            eps = auto_cutoff(GAMMA, frac)
            assert GAMMA.small_jump_variance(eps) <= frac * GAMMA.m2
            # and is not needlessly small
            assert GAMMA.small_jump_variance(eps * 1.01) > frac * GAMMA.m2 * 0.99

    def test_finite_activity_has_no_small_jumps(self):
        eps = TruncationPolicy().cutoff(UNIT_POISSON)
        assert 0 < eps < 1 and UNIT_POISSON.small_jump_variance(eps) == 0.0

    def test_invalid(self):
        with pytest.raises(ValueError):
            TruncationPolicy(epsilon=0.0)
        with pytest.raises(ValueError):
            TruncationPolicy(target_variance_fraction=0.0)
        with pytest.raises(ValueError):
            TruncationPolicy(small_jumps="keep")

    def test_cell_variance_modes(self):
        eps = 0.1
        g = cell_variance(GAMMA, TruncationPolicy(eps, SmallJumps.GAUSSIAN))
        d = cell_variance(GAMMA, TruncationPolicy(eps, SmallJumps.DROP))
        assert g == pytest.approx(GAMMA.m2, rel=1e-12)
        assert g - d == pytest.approx(GAMMA.small_jump_variance(eps), rel=1e-12)


class TestSamplePoints:
    def test_poisson_count_mean(self):
        rng = stream(5, 9)
        counts = np.array([len(sample_points(UNIT_POISSON, (0, 1, 0, 1), 0.5, rng)) for _ in range(10 ** 5)])
        assert abs(counts.mean() - 1.0) < 3 * math.sqrt(1.0 / counts.size)

    def test_gamma_count_mean(self):
        rng = stream(6, 10)
        counts = np.array([len(sample_points(GAMMA, (0, 1, 0, 2), 1.0, rng)) for _ in range(10 ** 5)])
        assert abs(counts.mean() - TWO_E1_AT_1) < 3 * math.sqrt(TWO_E1_AT_1 / counts.size)

    def test_zero_area(self):
        ps = sample_points(GAMMA, (0, 1, 0.5, 0.5), 0.1, stream(0))
        assert len(ps) == 0

    def test_points_in_region_and_sorted(self):
        ps = sample_points(GAMMA, (0.5, 10.5, -1.0, 9.0), 0.05, stream(1))
        assert len(ps) > 150  # mean ~247
        assert np.all(np.diff(ps.t) >= 0)
        assert np.all((ps.t >= 0.5) & (ps.t <= 10.5) & (ps.x >= -1) & (ps.x <= 9))
        assert np.all(np.abs(ps.z) > 0.05)


class TestNoiseIncrements:
    geom = GridGeometry(1.0, 0.0, 0.25)

    def test_drop_mode_counts(self):
        rng = stream(2, 2)
        inc = compensated_increments(UNIT_POISSON, np.ones(10 ** 5), TruncationPolicy(0.5, "drop"), rng)
        counts = inc + 1.0
        assert np.allclose(counts, np.round(counts))
        assert abs(inc.mean()) < 3 / math.sqrt(inc.size)

    def test_unit_cell_variance_gaussian(self):
        inc = compensated_increments(GAMMA, np.ones(10 ** 5), TruncationPolicy(), stream(2, 3))
        ok, var, se = _within_var(inc, GAMMA.m2)
        assert ok, (var, se)
        assert abs(inc.mean()) < 3 * math.sqrt(GAMMA.m2 / inc.size)

    def test_sum_of_cells_matches_union(self):
        # 16 x 8 cells of area 1/128 covering a unit square
        areas = np.full((10 ** 4, 16, 8), 1 / 128)
        total = compensated_increments(GAMMA, areas, TruncationPolicy(), stream(2, 4)).sum(axis=(1, 2))
        ok, var, se = _within_var(total, GAMMA.m2)
        assert ok, (var, se)

    def test_drop_mode_deficit(self):
        eps = 0.2
        a = compensated_increments(GAMMA, np.ones(2 * 10 ** 5), TruncationPolicy(eps, "drop"), stream(4, 1))
        ok, var, se = _within_var(a, GAMMA.m2 - GAMMA.small_jump_variance(eps))
        assert ok, (var, se)

    def test_deterministic(self):
        a = noise_increments(GAMMA, self.geom, seed=11, replicate=3)
        b = noise_increments(GAMMA, self.geom, seed=11, replicate=3)
        assert np.array_equal(a.increments, b.increments)
        c = noise_increments(GAMMA, self.geom, seed=11, replicate=4)
        assert not np.array_equal(a.increments, c.increments)

    def test_shape_and_readonly(self):
        f = noise_increments(GAMMA, self.geom, seed=0)
        assert f.increments.shape == self.geom.noise_shape == (4, 8)
        with pytest.raises(ValueError):
            f.increments[0, 0] = 1.0

    def test_cells_uncorrelated_and_centered(self):
        R = 10 ** 5
        g = GridGeometry(0.5, 0.0, 0.25)
        areas = np.full((R,) + g.noise_shape, g.delta ** 2)
        inc = compensated_increments(GAMMA, areas, TruncationPolicy(), stream(8, 1))
        flat = inc.reshape(R, -1)
        sd = math.sqrt(cell_variance(GAMMA, TruncationPolicy(), g.delta ** 2))
        assert np.all(np.abs(flat.mean(axis=0)) < 4 * sd / math.sqrt(R))
        corr = np.corrcoef(flat.T)
        off = corr[~np.eye(corr.shape[0], dtype=bool)]
        # a handful of pairs; 4.5/sqrt(R) keeps the family-wise false alarm rate small
        assert np.max(np.abs(off)) < 4.5 / math.sqrt(R)


class TestStepFunction:
    def test_norms(self):
        X = StepFunction.indicator(0, 1, 0, 2, 2.0)
        assert X.norm_p(2) == pytest.approx(math.sqrt(8))
        assert X.norm_p(4) == pytest.approx((16 * 2) ** 0.25)

    def test_overlapping_rectangles_add(self):
        X = StepFunction(((0, 1, 0, 1, 1.0), (0.5, 1, 0, 1, 2.0)))
        t, x, v = X.cells()
        assert np.allclose(t, [0, 0.5, 1]) and np.allclose(x, [0, 1])
        assert np.allclose(v[:, 0], [1.0, 3.0])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            StepFunction(((0, 1, 0, 1, math.inf),))

    def test_zero_integrand(self):
        assert integrate_step(StepFunction(()), 1.0, GAMMA, None, stream(0)) == 0.0
        assert integrate_step(StepFunction.indicator(0, 1, 0, 1, 0.0), 1.0, GAMMA, None, stream(0)) == 0.0

    def test_support_past_horizon(self):
        with pytest.raises(ValueError):
            integrate_step(StepFunction.indicator(0, 2, 0, 1), 1.0, GAMMA, None, stream(0))


class TestIsometry:
    def test_unit_square_gamma(self):
        s = integrate_step_samples(StepFunction.indicator(0, 1, 0, 1), 1.0, GAMMA, None, 10 ** 5, seed=1)
        assert abs(s.mean()) < 3 * s.std() / math.sqrt(s.size)
        ok, var, se = _within_var(s, 1.0)
        assert ok, (var, se)

    def test_scaled_rectangle_poisson(self):
        X = StepFunction.indicator(0, 1, 0, 2, 2.0)
        s = integrate_step_samples(X, 1.0, UNIT_POISSON, None, 10 ** 5, seed=2)
        ok, var, se = _within_var(s, 8.0)
        assert ok, (var, se)

    @pytest.mark.parametrize("X", [
        StepFunction.indicator(0, 2, 0, 2),
        StepFunction(((0, 1, -2, 2, 1.5), (1, 2, 0, 3, -0.5))),
        StepFunction(((0, 2, 0, 2, 1.0), (0.5, 1.5, 0.5, 1.5, 1.0))),
    ])
    def test_isometry_band_large_support(self, X):
        # the fixed 4/sqrt(R) band is about two standard errors for supports of area >= 4
        R = 10 ** 5
        s = integrate_step_samples(X, 2.0, GAMMA, None, R, seed=3)
        ratio = np.var(s, ddof=1) / (GAMMA.m2 * X.norm_p(2) ** 2)
        assert 1 - 4 / math.sqrt(R) <= ratio <= 1 + 4 / math.sqrt(R)

    @given(h=st.floats(0.1, 3.0), w=st.floats(0.1, 3.0), c=st.floats(-2, 2).filter(lambda v: abs(v) > 0.1))
    @settings(max_examples=8, deadline=None)
    def test_isometry_any_rectangle_pair(self, h, w, c):
        X = StepFunction(((0, h / 2, 0, w, c), (h / 2, h, -w, 0, -c)))
        s = integrate_step_samples(X, h, GAMMA, None, 20000, seed=3)
        ok, var, se = _within_var(s, GAMMA.m2 * X.norm_p(2) ** 2, k=4.0)
        assert ok, (var, se)

    def test_sample_helper_matches_single_draws_in_law(self):
        X = StepFunction.indicator(0, 1, 0, 1)
        rng = stream(4)
        single = np.array([integrate_step(X, 1.0, UNIT_POISSON, TruncationPolicy(0.5, "drop"), rng)
                           for _ in range(5000)])
        assert np.allclose(single + 1, np.round(single + 1))
        assert abs(single.mean()) < 4 / math.sqrt(single.size)
