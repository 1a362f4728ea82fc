"""Stochastic wave equation in one space dimension driven by Lévy space-time noise.

Lattice simulation, Monte Carlo moments and the deterministic moment
comparisons (Volterra second moment, weighted upper bound, Rosenthal check).
"""

__version__ = "0.1.0"

from .fields import (Coefficient, Constant, Cosine, IndicatorInterval, Scenario,
                     TabulatedDisplacement, TabulatedVelocity, ZeroVelocity, initial_wave, kernel_G)
from .geometry import GridGeometry
from .levy_measure import (DiracMixture, GammaMeasure, InfiniteMomentError, LevyMeasure,
                           TabulatedMeasure, ZeroTailMassError, measure_from_dict)
from .moments import (LyapunovFit, MomentEstimate, estimate_mean, estimate_moments,
                      fit_growth_rate, lyapunov_fit, weighted_norm)
from .oracle_bounds import (BoundConstants, ConstantKernel, LinearKernel, TabulatedKernel,
                            bound_constants, linear_second_moment, lower_bound_moment,
                            rosenthal_check, upper_bound_moment, volterra_solve)
from .prm import (NoiseField, SmallJumps, StepFunction, TruncationPolicy, integrate_step,
                  noise_increments, sample_points)
from .solver import GridSolution, Scheme, picard_differences, picard_sequence, simulate

__all__ = [
    "BoundConstants", "Coefficient", "Constant", "ConstantKernel", "Cosine", "DiracMixture",
    "GammaMeasure", "GridGeometry", "GridSolution", "IndicatorInterval", "InfiniteMomentError",
    "LevyMeasure", "LinearKernel", "LyapunovFit", "MomentEstimate", "NoiseField", "Scenario",
    "Scheme", "SmallJumps", "StepFunction", "TabulatedDisplacement", "TabulatedKernel",
    "TabulatedMeasure", "TabulatedVelocity", "TruncationPolicy", "ZeroTailMassError",
    "ZeroVelocity", "bound_constants", "estimate_mean", "estimate_moments", "fit_growth_rate",
    "initial_wave", "integrate_step", "kernel_G", "linear_second_moment", "lower_bound_moment",
    "lyapunov_fit", "measure_from_dict", "noise_increments", "picard_differences",
    "picard_sequence", "rosenthal_check", "sample_points", "simulate", "upper_bound_moment",
    "volterra_solve", "weighted_norm",
]
