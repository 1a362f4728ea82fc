"""Three jump measures and the quantities the noise sampler needs from them."""
import numpy as np

from levywave import DiracMixture, GammaMeasure, TabulatedMeasure, InfiniteMomentError

# Gamma white noise: nu(dz) = alpha z^-1 e^{-beta z} dz on z > 0.
# Infinitely many small jumps, but every moment is finite.
gamma = GammaMeasure(alpha=1.0, beta=1.0)
for p in (2, 3, 4, 6):
    print(f"Gamma(1,1)  m_{p} = {gamma.moment(p):g}")

# Jumps above eps arrive at rate tail_mass(eps); jumps below contribute
# small_jump_variance(eps) to the second moment.
for eps in (1.0, 0.1, 1e-3):
    print(f"eps={eps:<6g} tail mass {gamma.tail_mass(eps):8.4f}  "
          f"small-jump variance {gamma.small_jump_variance(eps):.2e}")

# Sampling the big jumps uses rejection from eps + Exp(beta).
rng = np.random.default_rng(0)
z = gamma.sample_jump(1.0, rng, size=100_000)
print(f"mean jump above 1: {z.mean():.4f}   (exact {np.exp(-1) / gamma.tail_mass(1.0):.4f}),"
      f" acceptance rate {gamma.acceptance_rate(1.0):.3f}")

# A finite two-sided mixture is a compound Poisson measure: exact and cheap.
mix = DiracMixture.from_pairs([(1.0, 1.0), (0.5, -2.0)])
print("mixture m_2 =", mix.moment(2), " m_4 =", mix.moment(4))

# Tabulated densities may carry a power tail; moments past the tail index are
# reported as infinite instead of as a large number.
tab = TabulatedMeasure(nodes=(0.1, 1.0, 2.0), density_pos=(2.0, 1.0, 0.5), tail_index=5.0)
print("tabulated m_2 =", round(tab.moment(2), 4))
try:
    tab.moment(4)
except InfiniteMomentError as exc:
    print("tabulated m_4:", exc)
