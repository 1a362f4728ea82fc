"""Poisson random measure sampling and compensated Lévy white noise.

The noise ``L`` is simulated by truncating jumps at ``|z| = eps``: jumps above
the cutoff come from a Poisson random measure with intensity
``dt dx ν(dz)`` and are compensated by their mean, and jumps below it are
either dropped or replaced by a centred Gaussian with the same variance
``σ_eps²``. The Gaussian substitute keeps every cell variance equal to
``m_2 |cell|``, which is the quantity the isometry depends on.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import optimize

from .geometry import GridGeometry
from .levy_measure import LevyMeasure
from .streams import stream

NOISE_TAG, STEP_TAG, ROSENTHAL_TAG = 0, 1, 2

#: Replicates per stream block for vectorized samplers (integrate_step, Rosenthal).
BLOCK = 1024


class SmallJumps(str, enum.Enum):
    DROP = "drop"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class TruncationPolicy:
    """How the noise treats jumps with ``|z| <= eps``.

    ``epsilon=None`` selects the cutoff automatically so that
    ``σ_eps² <= target_variance_fraction * m_2``. For finite-activity measures
    the cutoff lands below the smallest jump and no truncation happens.
    """

    epsilon: float | None = None
    small_jumps: SmallJumps = SmallJumps.GAUSSIAN
    target_variance_fraction: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "small_jumps", SmallJumps(self.small_jumps))
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.target_variance_fraction <= 1:
            raise ValueError("target_variance_fraction must lie in (0, 1]")

    def cutoff(self, measure: LevyMeasure) -> float:
        if self.epsilon is not None:
            return float(self.epsilon)
        return auto_cutoff(measure, self.target_variance_fraction)

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "small_jumps": self.small_jumps.value,
                "target_variance_fraction": self.target_variance_fraction}


def auto_cutoff(measure: LevyMeasure, fraction: float) -> float:
    """Largest convenient ``eps`` with ``small_jump_variance(eps) <= fraction * m_2``."""
    if measure.inner_radius > 0:
        return 0.5 * measure.inner_radius
    target = fraction * measure.m2
    if fraction >= 1:
        return 1e300
    hi = 1.0
    while measure.small_jump_variance(hi) <= target:
        hi *= 2.0
    lo = hi
    while measure.small_jump_variance(lo) > target:
        lo /= 2.0
        if lo < 1e-300:
            raise ValueError("could not bracket the truncation level")
    if lo == hi:
        return lo
    root = optimize.brentq(lambda le: measure.small_jump_variance(math.exp(le)) - target,
                           math.log(lo), math.log(hi), xtol=1e-14)
    eps = math.exp(root)
    while measure.small_jump_variance(eps) > target:
        eps *= 1 - 1e-9
    return eps


def compensated_increments(measure: LevyMeasure, areas, policy: TruncationPolicy,
                           rng: np.random.Generator, eps: float | None = None) -> np.ndarray:
    """Independent samples of ``L(A)`` for cells of the given areas.

    Each entry is the sum of Poisson-many jumps with ``|z| > eps``, minus the
    compensator ``|A| ∫_{|z|>eps} z ν(dz)``, plus a Gaussian of variance
    ``σ_eps² |A|`` in Gaussian-substitute mode. Draw order is counts, jumps,
    Gaussians, so a given generator state always produces the same array.
    """
    areas = np.asarray(areas, dtype=float)
    if eps is None:
        eps = policy.cutoff(measure)
    lam = measure.tail_mass(eps)
    out = np.zeros(areas.shape)
    if lam > 0:
        counts = rng.poisson(lam * areas)
        total = int(counts.sum())
        if total:
            jumps = measure.sample_jump(eps, rng, size=total)
            owner = np.repeat(np.arange(areas.size), counts.ravel())
            out += np.bincount(owner, weights=jumps, minlength=areas.size).reshape(areas.shape)
        out -= areas * measure.tail_mean(eps)
    if policy.small_jumps is SmallJumps.GAUSSIAN:
        var = measure.small_jump_variance(eps)
        if var > 0:
            out += np.sqrt(var * areas) * rng.standard_normal(areas.shape)
    return out


def cell_variance(measure: LevyMeasure, policy: TruncationPolicy, area: float = 1.0) -> float:
    """Exact variance of one compensated cell increment."""
    eps = policy.cutoff(measure)
    var = measure.large_jump_variance(eps)
    if policy.small_jumps is SmallJumps.GAUSSIAN:
        var += measure.small_jump_variance(eps)
    return var * area


@dataclass(frozen=True)
class PointSet:
    """Atoms ``(t, x, z)`` of the Poisson random measure in a rectangle, sorted by time."""

    t: np.ndarray
    x: np.ndarray
    z: np.ndarray
    region: tuple[float, float, float, float]
    cutoff: float

    def __len__(self):
        return self.t.size


def sample_points(measure: LevyMeasure, region: Sequence[float], eps: float,
                  rng: np.random.Generator) -> PointSet:
    """Atoms of ``N`` on ``[t0, t1] x [x0, x1] x {|z| > eps}``.

    The count is Poisson with mean ``|region| ν(|z| > eps)``; given the count,
    positions are uniform and jump sizes follow the normalized restricted
    measure, all independent.
    """
    t0, t1, x0, x1 = map(float, region)
    if t1 < t0 or x1 < x0:
        raise ValueError("region bounds are reversed")
    area = (t1 - t0) * (x1 - x0)
    lam = measure.tail_mass(eps)
    n = int(rng.poisson(lam * area)) if area > 0 and lam > 0 else 0
    t = rng.uniform(t0, t1, n)
    x = rng.uniform(x0, x1, n)
    z = measure.sample_jump(eps, rng, size=n) if n else np.empty(0)
    order = np.argsort(t, kind="stable")
    return PointSet(t[order], x[order], z[order], (t0, t1, x0, x1), float(eps))


@dataclass(frozen=True)
class NoiseField:
    """Compensated noise increments on the cells of a :class:`GridGeometry`.

    ``increments[j, i]`` is ``L`` of the cell ``(t_j, t_{j+1}] x (x_i, x_{i+1}]``.
    """

    geometry: GridGeometry
    increments: np.ndarray
    policy: TruncationPolicy
    epsilon: float
    seed: int | None = None
    replicate: int | None = None

    def __post_init__(self):
        inc = np.array(self.increments, dtype=float)
        if inc.shape != self.geometry.noise_shape:
            raise ValueError(f"increments shape {inc.shape} does not match grid "
                             f"{self.geometry.noise_shape}")
        inc.flags.writeable = False
        object.__setattr__(self, "increments", inc)

    def with_increments(self, increments: np.ndarray) -> "NoiseField":
        return replace(self, increments=increments, seed=None, replicate=None)


def noise_increments(measure: LevyMeasure, geometry: GridGeometry,
                     policy: TruncationPolicy | None = None, rng: np.random.Generator | None = None,
                     *, seed: int = 0, replicate: int = 0) -> NoiseField:
    """Sample a :class:`NoiseField` over the enlarged strip of ``geometry``.

    Without an explicit ``rng`` the field is drawn from the counter-based
    sub-stream ``(seed, 0, replicate)``, so identical arguments give a
    bit-identical field.
    """
    policy = policy or TruncationPolicy()
    eps = policy.cutoff(measure)
    if rng is None:
        rng = stream(seed, NOISE_TAG, replicate)
    else:
        seed = replicate = None
    area = np.full(geometry.noise_shape, geometry.delta ** 2)
    inc = compensated_increments(measure, area, policy, rng, eps)
    return NoiseField(geometry, inc, policy, eps, seed, replicate)


@dataclass(frozen=True)
class StepFunction:
    """Sum of constants on rectangles ``(t0, t1, x0, x1, value)``."""

    rectangles: tuple[tuple[float, float, float, float, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        rects = tuple(tuple(float(v) for v in r) for r in self.rectangles)
        for t0, t1, x0, x1, v in rects:
            if not all(math.isfinite(c) for c in (t0, t1, x0, x1, v)):
                raise ValueError("step function must have bounded support and finite values")
            if not (0 <= t0 < t1 and x0 < x1):
                raise ValueError(f"degenerate or negative-time rectangle {(t0, t1, x0, x1)}")
        object.__setattr__(self, "rectangles", rects)

    @classmethod
    def indicator(cls, t0, t1, x0, x1, value=1.0) -> "StepFunction":
        return cls(((t0, t1, x0, x1, value),))

    @property
    def t_max(self) -> float:
        return max((r[1] for r in self.rectangles), default=0.0)

    def cells(self, max_dt: float | None = None):
        """Disjoint elementary cells: ``(t_edges, x_edges, values)``.

        With ``max_dt`` the time edges are refined so no interval exceeds it.
        """
        if not self.rectangles:
            return np.zeros(1), np.zeros(1), np.zeros((0, 0))
        t_edges = np.unique([c for r in self.rectangles for c in r[:2]])
        x_edges = np.unique([c for r in self.rectangles for c in r[2:4]])
        if max_dt is not None:
            parts = [np.linspace(a, b, max(1, math.ceil((b - a) / max_dt - 1e-9)) + 1)[:-1]
                     for a, b in zip(t_edges[:-1], t_edges[1:])]
            t_edges = np.append(np.concatenate(parts), t_edges[-1])
        tc = 0.5 * (t_edges[:-1] + t_edges[1:])
        xc = 0.5 * (x_edges[:-1] + x_edges[1:])
        values = np.zeros((tc.size, xc.size))
        for t0, t1, x0, x1, v in self.rectangles:
            values[np.ix_((tc > t0) & (tc < t1), (xc > x0) & (xc < x1))] += v
        return t_edges, x_edges, values

    def norm_p(self, p: float) -> float:
        """``(∫∫ |X|^p dx ds)^{1/p}``."""
        t_edges, x_edges, values = self.cells()
        if values.size == 0:
            return 0.0
        areas = np.outer(np.diff(t_edges), np.diff(x_edges))
        return float(np.sum(np.abs(values) ** p * areas) ** (1.0 / p))


def _check_horizon(X: StepFunction, T: float):
    if X.t_max > T + 1e-12:
        raise ValueError(f"integrand support extends past the horizon T={T}")


def integrate_step(X: StepFunction, T: float, measure: LevyMeasure,
                   policy: TruncationPolicy | None, rng: np.random.Generator) -> float:
    """One sample of ``∫_0^T ∫ X dL = Σ_cells X ΔL``."""
    _check_horizon(X, T)
    policy = policy or TruncationPolicy()
    t_edges, x_edges, values = X.cells()
    if not np.any(values):
        return 0.0
    areas = np.outer(np.diff(t_edges), np.diff(x_edges))
    inc = compensated_increments(measure, areas, policy, rng)
    return float(np.sum(values * inc))


def integrate_step_samples(X: StepFunction, T: float, measure: LevyMeasure,
                           policy: TruncationPolicy | None, replicates: int,
                           seed: int = 0) -> np.ndarray:
    """``replicates`` independent samples of the integral, drawn block-wise.

    Block ``b`` uses the sub-stream ``(seed, STEP_TAG, b)``; the result depends only
    on ``(seed, replicates)``.
    """
    _check_horizon(X, T)
    policy = policy or TruncationPolicy()
    t_edges, x_edges, values = X.cells()
    out = np.zeros(replicates)
    if not np.any(values):
        return out
    eps = policy.cutoff(measure)
    areas = np.outer(np.diff(t_edges), np.diff(x_edges))
    for b, start in enumerate(range(0, replicates, BLOCK)):
        n = min(BLOCK, replicates - start)
        inc = compensated_increments(measure, np.broadcast_to(areas, (n,) + areas.shape),
                                     policy, stream(seed, STEP_TAG, b), eps)
        out[start:start + n] = np.sum(values * inc, axis=(1, 2))
    return out
