"""The renewal equation behind the lower bound, and the explicit moment envelopes."""
import math

import numpy as np

from levywave import (Coefficient, Constant, GammaMeasure, LinearKernel, Scenario, bound_constants,
                      linear_second_moment, lower_bound_moment, upper_bound_moment, volterra_solve)
from levywave.oracle_bounds import crossing_time

# f(t) = a^2 + int_0^t f(s) g(t-s) ds with g(t) = c t has solution a^2 cosh(sqrt(c) t).
for d in (1e-2, 1e-3):
    sol = volterra_solve(1.0, LinearKernel(0.5), 5.0, d)
    err = np.max(np.abs(sol.f - np.cosh(math.sqrt(0.5) * sol.t)))
    print(f"delta={d:g}  sup error {err:.2e}")

# Lower envelope (a^2/2) e^{lam t}: cosh always sits above it, so the crossing time is 0.
t = np.linspace(0, 12, 121)
exact = linear_second_moment(1.0, 1.0, 1.0, t)
lower = lower_bound_moment(1.0, 1.0, 1.0, t)
print("crossing time:", crossing_time(t, exact, lower), " ratio at t=12:", exact[-1] / lower[-1])

# Upper envelope L1^p exp(L2^{p/2} M_p^{1/2} p^{p/2} t), evaluated in log space.
scenario = Scenario(v0=Constant(1.0), sigma=Coefficient.linear(1.0))
gamma = GammaMeasure(1.0, 1.0)
c = bound_constants(scenario, gamma, C0=1.0)
print(f"gamma={c.gamma:.6f} L1={c.L1:.6f} L2={c.L2:g} in proof regime: {c.in_proof_regime}")
for p in (2, 4, 8):
    ub = upper_bound_moment(c, gamma, p, 1.0)
    print(f"p={p}: log envelope at t=1 = {ub.log_value:.2f}   beta = {c.beta(gamma, p):.3g}")
