import math

import numpy as np
import pytest

from levywave.fields import Coefficient, Constant, Cosine, IndicatorInterval, Scenario, initial_wave
from levywave.geometry import GridGeometry
from levywave.levy_measure import DiracMixture, GammaMeasure
from levywave.moments import estimate_mean
from levywave.prm import noise_increments
from levywave.solver import Scheme, picard_differences, picard_sequence, simulate, simulate_increments

GAMMA = GammaMeasure(1, 1)
LINEAR = Scenario(v0=Constant(1.0), sigma=Coefficient.linear(1.0))


class TestGeometry:
    def test_counts(self):
        g = GridGeometry(1.0, 0.5, 0.25)
        assert (g.n_steps, g.n_cells) == (4, 12)
        assert g.x_min == -1.5
        assert np.allclose(g.x_window, [-0.5, -0.25, 0, 0.25, 0.5])
        assert g.noise_shape == (4, 12)

    def test_misaligned(self):
        with pytest.raises(ValueError):
            GridGeometry(1.0, 0.0, 0.3)
        with pytest.raises(ValueError):
            GridGeometry(1.0, 0.1, 0.25)

    def test_node_lookup(self):
        g = GridGeometry(1.0, 0.5, 0.25)
        assert g.window_index(0.25) == 3 and g.time_index(0.75) == 3
        with pytest.raises(ValueError):
            g.window_index(0.3)


class TestDeterministic:
    def test_zero_coefficients_give_free_wave(self):
        s = Scenario(v0=Cosine(1.3, 2.0), v1=IndicatorInterval(-0.4, 0.7))
        g = GridGeometry(1.0, 1.0, 1 / 32)
        dL = noise_increments(GAMMA, g, seed=1)
        w = initial_wave(s, g.t_nodes[:, None], g.x_window[None, :])
        for scheme in Scheme:
            u = simulate(s, g, dL, scheme).values
            assert np.max(np.abs(u - w)) <= 1e-12

    def test_constant_data_is_exact(self):
        g = GridGeometry(0.5, 0.5, 1 / 16)
        u = simulate(Scenario(v0=Constant(2.5)), g, noise_increments(GAMMA, g, seed=2)).values
        assert np.all(u == 2.5)

    def test_first_row_is_initial_displacement(self):
        s = Scenario(v0=Cosine(1.0, 3.0), sigma=Coefficient.linear(1.0))
        g = GridGeometry(0.5, 1.0, 1 / 16)
        u = simulate(s, g, noise_increments(GAMMA, g, seed=3))
        assert np.array_equal(u.values[0], s.v0(g.x_window))

    def test_constant_drift(self):
        s = Scenario(v0=Constant(0.0), b=Coefficient.constant(1.0))
        g = GridGeometry(1.0, 0.0, 1 / 128)
        u = simulate_increments(s, g, np.zeros(g.noise_shape))
        assert abs(u[-1, 0] - 0.5) <= 0.02

    def test_first_order_grid_convergence(self):
        # b(u) = u with v0 = 1 solves u = cosh(t)
        s = Scenario(v0=Constant(1.0), b=Coefficient.linear(1.0))
        errs = []
        for d in (1 / 16, 1 / 32, 1 / 64, 1 / 128):
            g = GridGeometry(1.0, 0.0, d)
            errs.append(abs(simulate_increments(s, g, np.zeros(g.noise_shape))[-1, 0] - math.cosh(1)))
        ratios = np.array(errs[:-1]) / np.array(errs[1:])
        assert np.all((ratios > 1.6) & (ratios < 2.4))


class TestSchemes:
    geom = GridGeometry(1.0, 1.0, 1 / 32)

    @pytest.mark.parametrize("scenario", [
        LINEAR,
        Scenario(v0=Cosine(1.0, 2.0), v1=IndicatorInterval(-1, 0.5), sigma=Coefficient.affine(0.7, 0.3),
                 b=Coefficient.affine(-0.5, 0.2)),
    ])
    def test_cone_sum_equals_diamond(self, scenario):
        noise = noise_increments(GAMMA, self.geom, seed=4)
        a = simulate(scenario, self.geom, noise, Scheme.CONE_SUM).values
        b = simulate(scenario, self.geom, noise, Scheme.DIAMOND).values
        assert np.max(np.abs(a - b)) <= 1e-10 * np.max(np.abs(a))

    def test_batched_matches_single(self):
        g = GridGeometry(0.5, 0.25, 1 / 16)
        fields = [noise_increments(GAMMA, g, seed=5, replicate=r).increments for r in range(3)]
        batch = simulate_increments(LINEAR, g, np.stack(fields))
        for r in range(3):
            assert np.array_equal(batch[r], simulate_increments(LINEAR, g, fields[r]))

    def test_locality(self):
        g = self.geom
        noise = noise_increments(GAMMA, g, seed=6)
        base = simulate(LINEAR, g, noise, Scheme.CONE_SUM).at(1.0, 0.0)
        # cells (j, i) cover (t_j, t_j+1] x (x_i, x_i+1]; the backward cone of (T, 0) at row j
        # meets cells k-m .. k+m-1 with m = M - j and k the node of x = 0
        M, k = g.n_steps, int(round(-g.x_min / g.delta))
        outside = np.ones(g.noise_shape, dtype=bool)
        for j in range(M):
            m = M - j
            outside[j, k - m:k + m] = False
        rng = np.random.default_rng(99)
        inc = noise.increments.copy()
        inc[outside] = rng.normal(0, 5, outside.sum())
        pert = simulate(LINEAR, g, noise.with_increments(inc), Scheme.CONE_SUM).at(1.0, 0.0)
        assert pert == base
        inside = inc.copy()
        inside[M - 1, k] += 1.0
        assert simulate(LINEAR, g, noise.with_increments(inside), Scheme.CONE_SUM).at(1.0, 0.0) != base

    def test_mismatched_noise(self):
        other = noise_increments(GAMMA, GridGeometry(1.0, 0.5, 1 / 32), seed=0)
        with pytest.raises(ValueError):
            simulate(LINEAR, self.geom, other)
        with pytest.raises(ValueError):
            simulate_increments(LINEAR, self.geom, np.zeros((3, 3)))

    def test_mean_equals_free_wave(self):
        s = Scenario(v0=Cosine(1.0, 1.0), sigma=Coefficient.affine(0.8, 0.5))
        g = GridGeometry(1.0, 0.5, 1 / 16)
        mean, se = estimate_mean(s, g, DiracMixture.from_pairs([(1, 1), (1, -0.5)]), None, 4000, seed=7)
        w = initial_wave(s, g.t_nodes[:, None], g.x_window[None, :])
        z = np.abs(mean - w)[1:] / se[1:]
        # 3 SE pointwise; a few exceedances are expected across ~150 correlated nodes
        assert np.mean(z > 3) < 0.03 and np.max(z) < 4.5


class TestPicard:
    geom = GridGeometry(1.0, 1.0, 1 / 32)

    def test_no_coupling_is_stationary(self):
        s = Scenario(v0=Cosine(1.0, 1.0))
        its = picard_sequence(s, self.geom, noise_increments(GAMMA, self.geom, seed=8), 3)
        assert len(its) == 4
        assert all(np.array_equal(its[0].values, it.values) for it in its)

    def test_contraction_and_limit(self):
        noise = noise_increments(GAMMA, self.geom, seed=9)
        its = picard_sequence(LINEAR, self.geom, noise, 40)
        d = picard_differences(its)
        floor = 1e-12 * np.max(np.abs(its[-1].values))
        live = np.nonzero(d[:-1] > floor)[0]
        live = live[live >= 2]
        assert live.size > 3
        assert np.all(d[live + 1] / d[live] < 1)
        ref = simulate(LINEAR, self.geom, noise, Scheme.CONE_SUM)
        assert np.max(np.abs(its[-1].values - ref.values)) <= 1e-8

    def test_iterates_are_nilpotent_on_the_lattice(self):
        # level n depends only on forcing from levels < n, so iterate M reproduces the solution
        g = GridGeometry(0.25, 0.25, 1 / 32)
        noise = noise_increments(GAMMA, g, seed=10)
        its = picard_sequence(LINEAR, g, noise, g.n_steps)
        ref = simulate(LINEAR, g, noise, Scheme.CONE_SUM)
        assert np.max(np.abs(its[-1].values - ref.values)) <= 1e-13

    def test_bad_n(self):
        with pytest.raises(ValueError):
            picard_sequence(LINEAR, self.geom, noise_increments(GAMMA, self.geom, seed=0), 0)
