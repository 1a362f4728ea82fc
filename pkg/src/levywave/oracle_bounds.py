"""Deterministic oracles and the explicit moment bounds.

* :func:`volterra_solve` -- trapezoidal convolution quadrature for the renewal
  equation ``f(t) = a² + ∫_0^t f(s) g(t - s) ds``.
* :func:`linear_second_moment` -- the exact second moment for ``σ(u) = λu``,
  ``b = 0`` and constant data, ``a² cosh(|λ| sqrt(m_2/2) t)``.
* :class:`BoundConstants`, :func:`upper_bound_moment`,
  :func:`lower_bound_moment` -- the intermittency envelopes, in log space.
* :func:`rosenthal_check` -- Monte Carlo check of the maximal inequality for
  deterministic step integrands.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .levy_measure import LevyMeasure
from .prm import BLOCK, ROSENTHAL_TAG, StepFunction, TruncationPolicy, compensated_increments
from .streams import stream


# -- renewal equation ----------------------------------------------------------

@dataclass(frozen=True)
class LinearKernel:
    """``g(t) = c t``."""

    c: float

    def __call__(self, t):
        return self.c * np.asarray(t, dtype=float)

    def to_dict(self):
        return {"kind": "linear", "c": self.c}


@dataclass(frozen=True)
class ConstantKernel:
    """``g(t) = c``."""

    c: float

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.c)

    def to_dict(self):
        return {"kind": "constant", "c": self.c}


@dataclass(frozen=True)
class TabulatedKernel:
    """Linear interpolation of ``(ts, values)``; constant beyond the table."""

    ts: tuple[float, ...]
    values: tuple[float, ...]

    def __call__(self, t):
        return np.interp(t, self.ts, self.values)

    def to_dict(self):
        return {"kind": "tabulated", "ts": list(self.ts), "values": list(self.values)}


def kernel_from_dict(spec: dict):
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind in ("linear", "constant"):
        if set(spec) - {"c"}:
            raise ValueError(f"unknown kernel field(s): {', '.join(sorted(set(spec) - {'c'}))}")
        return (LinearKernel if kind == "linear" else ConstantKernel)(float(spec["c"]))
    if kind == "tabulated":
        if set(spec) - {"ts", "values"}:
            raise ValueError("unknown kernel field(s)")
        return TabulatedKernel(tuple(spec["ts"]), tuple(spec["values"]))
    raise ValueError(f"unknown kernel kind {kind!r}")


@dataclass(frozen=True)
class VolterraSolution:
    t: np.ndarray
    f: np.ndarray
    a2: float
    kernel: object
    delta: float


def volterra_solve(a2: float, g, T: float, delta: float) -> VolterraSolution:
    """Solve ``f(t) = a2 + ∫_0^t f(s) g(t-s) ds`` by the trapezoidal rule.

    ``f_n = a2 + Δ[½ g_n f_0 + Σ_{0<k<n} g_{n-k} f_k + ½ g_0 f_n]``; the last
    term is moved to the left-hand side. Global error is O(Δ²) for smooth
    ``g``.
    """
    n = round(T / delta)
    if not delta > 0 or abs(n * delta - T) > 1e-9 * max(1.0, T):
        raise ValueError("T must be an integer multiple of delta")
    t = np.arange(n + 1) * delta
    gv = np.asarray(g(t), dtype=float)
    f = np.empty(n + 1)
    f[0] = a2
    denom = 1.0 - 0.5 * delta * gv[0]
    if denom <= 0:
        raise ValueError("step too large for the kernel's value at 0")
    for k in range(1, n + 1):
        # gv[k-1:0:-1] pairs g_{k-i} with f_i for i = 1..k-1
        s = 0.5 * gv[k] * f[0] + np.dot(gv[k - 1:0:-1], f[1:k])
        f[k] = (a2 + delta * s) / denom
    return VolterraSolution(t, f, float(a2), g, float(delta))


def linear_second_moment(a: float, lam: float, m2: float, t):
    """``a² cosh(|λ| sqrt(m2/2) t)``: exact ``E|u(t,x)|²`` for ``σ(u) = λu``, ``b = 0``, ``v0 = a``, ``v1 = 0``."""
    if not m2 > 0:
        raise ValueError("m2 must be positive")
    return a * a * np.cosh(abs(lam) * math.sqrt(m2 / 2.0) * np.asarray(t, dtype=float))


def lower_bound_moment(a: float, L_sigma: float, m2: float, t):
    """``(a²/2) exp(L_σ sqrt(m2/2) t)``, the eventual lower bound on ``inf_x E|u|²``."""
    if not a > 0:
        raise ValueError("a must be positive")
    return 0.5 * a * a * np.exp(L_sigma * math.sqrt(m2 / 2.0) * np.asarray(t, dtype=float))


def crossing_time(t, exact, bound) -> float:
    """First grid time after which ``bound <= exact`` holds at every later grid time."""
    t = np.asarray(t)
    bad = np.nonzero(np.asarray(bound) > np.asarray(exact))[0]
    if bad.size == 0:
        return float(t[0])
    if bad[-1] == t.size - 1:
        return math.inf
    return float(t[bad[-1] + 1])


# -- explicit constants --------------------------------------------------------

@dataclass(frozen=True)
class BoundValue:
    value: float
    log_value: float


@dataclass(frozen=True)
class BoundConstants:
    """Constants of the moment envelopes.

    ``gamma = K + 1/4 + 1/(2e²)``, ``L1 = 2 gamma + K/2``, ``L2 = 9 C0 L`` and
    ``beta(p)² = p^{p-2} M_p L2^p``. ``C0`` bounds the Rosenthal constant,
    ``B_p <= C0 p``; it has no known numeric value and defaults to 1.
    ``in_proof_regime`` is False when ``L <= 1/(4 m_2)`` or ``4L < 1``; the
    envelope is still reported but those side conditions were assumed when
    ``beta`` was chosen.
    """

    K: float
    L: float
    C0: float
    m2: float
    L_sigma: float = 0.0

    def __post_init__(self):
        if self.C0 < 1:
            raise ValueError("C0 must be >= 1")
        if not (self.L > 0 and self.m2 > 0 and self.K >= 0):
            raise ValueError("need L > 0, m2 > 0, K >= 0")
        if not self.in_proof_regime:
            warnings.warn(f"L={self.L} violates L > 1/(4 m2) or 4L >= 1; "
                          "bounds are outside the proven regime", stacklevel=3)

    @property
    def gamma(self) -> float:
        return self.K + 0.25 + 1.0 / (2.0 * math.e ** 2)

    @property
    def L1(self) -> float:
        return 2.0 * self.gamma + 0.5 * self.K

    @property
    def L2(self) -> float:
        return 9.0 * self.C0 * self.L

    @property
    def lam(self) -> float:
        """Lower-bound growth rate ``L_σ sqrt(m2/2)``."""
        return self.L_sigma * math.sqrt(self.m2 / 2.0)

    @property
    def in_proof_regime(self) -> bool:
        return self.L > 1.0 / (4.0 * self.m2) and 4.0 * self.L >= 1.0

    def log_beta(self, measure: LevyMeasure, p: float) -> float:
        Mp = measure.max_moment(p)
        return 0.5 * ((p - 2) * math.log(p) + math.log(Mp) + p * math.log(self.L2))

    def beta(self, measure: LevyMeasure, p: float) -> float:
        return math.exp(self.log_beta(measure, p))

    def to_dict(self):
        return {"K": self.K, "L": self.L, "C0": self.C0, "m2": self.m2, "L_sigma": self.L_sigma,
                "gamma": self.gamma, "L1": self.L1, "L2": self.L2, "lambda": self.lam,
                "in_proof_regime": self.in_proof_regime}


def lipschitz_floor(m2: float) -> float:
    """Smallest ``L`` meeting the side conditions ``L > 1/(4 m2)`` and ``4L >= 1``."""
    return max(0.25, math.nextafter(1.0 / (4.0 * m2), math.inf))


def bound_constants(scenario, measure: LevyMeasure, C0: float = 1.0,
                    raise_to_floor: bool = True) -> BoundConstants:
    """Constants built from a scenario, lifting ``L`` to the side-condition floor."""
    m2 = measure.m2
    L = scenario.lipschitz_L
    if raise_to_floor:
        L = max(L, lipschitz_floor(m2))
    return BoundConstants(scenario.initial_bound_K, L, C0, m2, scenario.lower_lipschitz_sigma)


def upper_bound_moment(constants: BoundConstants, measure: LevyMeasure, p: float, t) -> BoundValue:
    """``L1^p exp(L2^{p/2} M_p^{1/2} p^{p/2} t)`` and its logarithm."""
    if p < 2:
        raise ValueError("p must be >= 2")
    Mp = measure.max_moment(p)
    log_rate = 0.5 * p * math.log(constants.L2) + 0.5 * math.log(Mp) + 0.5 * p * math.log(p)
    log_value = p * math.log(constants.L1) + math.exp(log_rate) * np.asarray(t, dtype=float)
    with np.errstate(over="ignore"):
        value = np.exp(log_value)
    if np.ndim(log_value) == 0:
        return BoundValue(float(value), float(log_value))
    return BoundValue(value, log_value)


# -- Rosenthal inequality ------------------------------------------------------

@dataclass(frozen=True)
class RosenthalReport:
    p: float
    lhs_p_norm: float
    lhs_stderr: float
    term_quadratic: float
    term_jump: float
    empirical_ratio: float
    replicates: int

    def to_dict(self):
        return {k: getattr(self, k) for k in ("p", "lhs_p_norm", "lhs_stderr", "term_quadratic",
                                              "term_jump", "empirical_ratio", "replicates")}


def running_sup_samples(X: StepFunction, T: float, measure: LevyMeasure,
                        policy: TruncationPolicy | None, replicates: int, seed: int = 0,
                        max_dt: float = 1 / 256) -> np.ndarray:
    """Samples of ``sup_{s<=T} |∫_0^s ∫ X dL|`` tracked on time steps of at most ``max_dt``.

    The running maximum is taken over the step endpoints, so it slightly
    underestimates the continuous-time supremum.
    """
    if X.t_max > T + 1e-12:
        raise ValueError("integrand support extends past the horizon")
    policy = policy or TruncationPolicy()
    t_edges, x_edges, values = X.cells(max_dt=max_dt)
    out = np.zeros(replicates)
    if not np.any(values):
        return out
    eps = policy.cutoff(measure)
    areas = np.outer(np.diff(t_edges), np.diff(x_edges))
    for b, start in enumerate(range(0, replicates, BLOCK)):
        n = min(BLOCK, replicates - start)
        inc = compensated_increments(measure, np.broadcast_to(areas, (n,) + areas.shape),
                                     policy, stream(seed, ROSENTHAL_TAG, b), eps)
        path = np.cumsum(np.sum(values * inc, axis=2), axis=1)
        out[start:start + n] = np.max(np.abs(path), axis=1)
    return out


def rosenthal_check(X: StepFunction, measure: LevyMeasure, policy: TruncationPolicy | None,
                    p: float, T: float, replicates: int, seed: int = 0,
                    max_dt: float = 1 / 256) -> RosenthalReport:
    """Empirical ``||sup|Y|||_p`` against ``m_2^{1/2}||X||_2 + m_p^{1/p}||X||_p``.

    ``empirical_ratio`` is a lower estimate of the best constant ``B_p``.
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    m2 = measure.moment(2.0)
    mp = measure.moment(p)  # raises InfiniteMomentError
    quad = math.sqrt(m2) * X.norm_p(2.0)
    jump = mp ** (1.0 / p) * X.norm_p(p)
    sup = running_sup_samples(X, T, measure, policy, replicates, seed, max_dt)
    mom = np.mean(sup ** p)
    lhs = float(mom ** (1.0 / p))
    # delta method on E sup^p
    se_mom = float(np.std(sup ** p, ddof=1) / math.sqrt(replicates)) if replicates > 1 else 0.0
    lhs_se = lhs / (p * mom) * se_mom if mom > 0 else 0.0
    rhs = quad + jump
    ratio = lhs / rhs if rhs > 0 else 0.0
    return RosenthalReport(float(p), lhs, lhs_se, quad, jump, ratio, replicates)


def rosenthal_slope_probe(measure: LevyMeasure, X: StepFunction, p_list, T: float,
                          replicates: int, seed: int = 0, policy: TruncationPolicy | None = None,
                          max_dt: float = 1 / 256) -> list[tuple[float, float]]:
    """``(p, empirical_ratio)`` for each ``p``, all from the same sample paths."""
    p_list = [float(p) for p in p_list]
    if not p_list:
        return []
    for p in p_list:
        measure.moment(p)
    sup = running_sup_samples(X, T, measure, policy, replicates, seed, max_dt)
    out = []
    m2 = measure.moment(2.0)
    for p in p_list:
        rhs = math.sqrt(m2) * X.norm_p(2.0) + measure.moment(p) ** (1.0 / p) * X.norm_p(p)
        lhs = float(np.mean(sup ** p) ** (1.0 / p))
        out.append((p, lhs / rhs if rhs > 0 else 0.0))
    return out
