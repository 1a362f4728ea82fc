"""Compensated noise on grid cells, and the isometry E|int X dL|^2 = m_2 ||X||^2."""
import numpy as np

from levywave import GammaMeasure, GridGeometry, StepFunction, TruncationPolicy, noise_increments
from levywave.prm import cell_variance, integrate_step_samples

gamma = GammaMeasure(1.0, 1.0)

# The default policy cuts jumps below eps (chosen so they carry at most 0.1% of
# m_2) and replaces them by a Gaussian of the same variance.
policy = TruncationPolicy()
eps = policy.cutoff(gamma)
print(f"auto cutoff eps = {eps:.3e}; small-jump variance {gamma.small_jump_variance(eps):.2e}")
print("variance per unit cell:", cell_variance(gamma, policy), "(Gaussian substitute)")
print("variance per unit cell:", cell_variance(gamma, TruncationPolicy(eps, "drop")), "(dropped)")

# One noise field on the enlarged strip [-K-T, K+T] x [0, T].
g = GridGeometry(T=1.0, K=0.5, delta=1 / 16)
field = noise_increments(gamma, g, seed=2024, replicate=0)
print("noise array", field.increments.shape, " total mass", field.increments.sum().round(4))
# Same (seed, replicate) gives the same bits.
again = noise_increments(gamma, g, seed=2024, replicate=0)
print("reproducible:", np.array_equal(field.increments, again.increments))

# Isometry on a two-rectangle integrand.
X = StepFunction(((0.0, 0.5, 0.0, 2.0, 1.5), (0.5, 1.0, -1.0, 1.0, -0.5)))
samples = integrate_step_samples(X, 1.0, gamma, policy, 100_000, seed=7)
print(f"Var int X dL = {samples.var(ddof=1):.4f}   m_2 ||X||_2^2 = {gamma.m2 * X.norm_p(2) ** 2:.4f}")
