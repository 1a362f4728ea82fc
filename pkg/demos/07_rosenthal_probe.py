"""How large is the Rosenthal constant for compensated Poisson integrals?"""
import math

from levywave import DiracMixture, StepFunction, rosenthal_check
from levywave.oracle_bounds import rosenthal_slope_probe

poisson = DiracMixture.from_pairs([(1.0, 1.0)])
X = StepFunction.indicator(0, 1, 0, 1)

r = rosenthal_check(X, poisson, None, p=2, T=1.0, replicates=20_000, seed=1)
print(f"p=2: ||sup|Y|||_2 = {r.lhs_p_norm:.4f} +/- {r.lhs_stderr:.4f}; "
      f"Doob gives <= 2; terms {r.term_quadratic:g} + {r.term_jump:g}")

# The best constant grows like p / log p; scaled ratios should level off.
for p, ratio in rosenthal_slope_probe(poisson, X, [2, 4, 6, 8], T=1.0, replicates=40_000, seed=2):
    print(f"p={p:g}  ratio {ratio:.3f}   ratio / (p / ln p) = {ratio / (p / math.log(p)):.3f}")
