"""Wave kernel, free wave and the coefficient/initial-data registry."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def kernel_G(t, x):
    """Fundamental solution ``G(t, x) = ½ 1{|x| <= t}`` (boundary included)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("kernel_G is defined for t >= 0")
    out = np.where(np.abs(x) <= t, 0.5, 0.0)
    return float(out) if out.ndim == 0 else out


# -- initial displacement ------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    a: float

    def __call__(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.a)

    @property
    def sup_abs(self):
        return abs(self.a)

    @property
    def inf(self):
        return self.a

    def to_dict(self):
        return {"kind": "constant", "a": self.a}


@dataclass(frozen=True)
class Cosine:
    amplitude: float
    frequency: float = 1.0

    def __call__(self, x):
        return self.amplitude * np.cos(self.frequency * np.asarray(x, dtype=float))

    @property
    def sup_abs(self):
        return abs(self.amplitude)

    @property
    def inf(self):
        return -abs(self.amplitude)

    def to_dict(self):
        return {"kind": "cosine", "amplitude": self.amplitude, "frequency": self.frequency}


def _tabulated_arrays(xs, values):
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    if xs.ndim != 1 or xs.shape != values.shape or xs.size < 2:
        raise ValueError("tabulated data needs matching 1-D arrays of length >= 2")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("tabulated abscissae must be strictly increasing")
    return xs, values


@dataclass(frozen=True)
class TabulatedDisplacement:
    """Linear interpolation with the end values held constant outside the table."""

    xs: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        xs, values = _tabulated_arrays(self.xs, self.values)
        object.__setattr__(self, "xs", tuple(xs))
        object.__setattr__(self, "values", tuple(values))

    def __call__(self, x):
        return np.interp(x, self.xs, self.values)

    @property
    def sup_abs(self):
        return float(np.max(np.abs(self.values)))

    @property
    def inf(self):
        return float(np.min(self.values))

    def to_dict(self):
        return {"kind": "tabulated", "xs": list(self.xs), "values": list(self.values)}


# -- initial velocity ----------------------------------------------------------

@dataclass(frozen=True)
class ZeroVelocity:
    def integral(self, lo, hi):
        return np.zeros(np.broadcast(lo, hi).shape)

    @property
    def l1_norm(self):
        return 0.0

    def to_dict(self):
        return {"kind": "zero"}


@dataclass(frozen=True)
class IndicatorInterval:
    """``v1 = 1_[left, right]``."""

    left: float
    right: float

    def __post_init__(self):
        if not self.left < self.right:
            raise ValueError("IndicatorInterval needs left < right")

    def integral(self, lo, hi):
        """Length of ``[lo, hi] ∩ [left, right]``."""
        return np.maximum(0.0, np.minimum(hi, self.right) - np.maximum(lo, self.left))

    @property
    def l1_norm(self):
        return self.right - self.left

    def to_dict(self):
        return {"kind": "indicator", "left": self.left, "right": self.right}


@dataclass(frozen=True)
class TabulatedVelocity:
    """Piecewise-linear velocity, zero outside ``[xs[0], xs[-1]]``."""

    xs: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        xs, values = _tabulated_arrays(self.xs, self.values)
        object.__setattr__(self, "xs", tuple(xs))
        object.__setattr__(self, "values", tuple(values))

    def _antiderivative(self, x):
        xs, f = np.asarray(self.xs), np.asarray(self.values)
        h = np.diff(xs)
        nodes = np.concatenate(([0.0], np.cumsum(0.5 * h * (f[:-1] + f[1:]))))
        x = np.clip(np.asarray(x, dtype=float), xs[0], xs[-1])
        k = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, xs.size - 2)
        s = x - xs[k]
        return nodes[k] + f[k] * s + (f[k + 1] - f[k]) * s * s / (2 * h[k])

    def integral(self, lo, hi):
        return self._antiderivative(hi) - self._antiderivative(lo)

    @property
    def l1_norm(self):
        xs, f = np.asarray(self.xs), np.asarray(self.values)
        h = np.diff(xs)
        fa, fb = f[:-1], f[1:]
        same = fa * fb >= 0
        denom = np.where(same, 1.0, np.abs(fa) + np.abs(fb))
        pieces = np.where(same, 0.5 * h * (np.abs(fa) + np.abs(fb)),
                          0.5 * h * (fa * fa + fb * fb) / denom)
        return float(np.sum(pieces))

    def to_dict(self):
        return {"kind": "tabulated", "xs": list(self.xs), "values": list(self.values)}


# -- coefficients --------------------------------------------------------------

_COEFFICIENT_KINDS = ("linear", "affine", "constant", "zero")


@dataclass(frozen=True)
class Coefficient:
    """``u -> slope * u + offset`` tagged with its declared kind.

    Kinds: ``linear(λ)``, ``affine(λ, c)``, ``constant(c)`` and ``zero``.
    Keeping the set closed makes Lipschitz data exact.
    """

    kind: str
    slope: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in _COEFFICIENT_KINDS:
            raise ValueError(f"unknown coefficient kind {self.kind!r}")
        if self.kind == "linear" and self.offset != 0:
            raise ValueError("linear coefficient has no offset")
        if self.kind == "constant" and self.slope != 0:
            raise ValueError("constant coefficient has no slope")
        if self.kind == "zero" and (self.slope or self.offset):
            raise ValueError("zero coefficient has no parameters")

    @classmethod
    def linear(cls, lam: float) -> "Coefficient":
        return cls("linear", float(lam), 0.0)

    @classmethod
    def affine(cls, lam: float, c: float) -> "Coefficient":
        return cls("affine", float(lam), float(c))

    @classmethod
    def constant(cls, c: float) -> "Coefficient":
        return cls("constant", 0.0, float(c))

    @classmethod
    def zero(cls) -> "Coefficient":
        return cls("zero")

    def __call__(self, u):
        if self.kind == "zero":
            return np.zeros_like(np.asarray(u, dtype=float))
        return self.slope * np.asarray(u, dtype=float) + self.offset

    @property
    def is_zero(self) -> bool:
        return self.slope == 0 and self.offset == 0

    @property
    def lipschitz(self) -> float:
        return abs(self.slope)

    @property
    def lower_lipschitz(self) -> float:
        """``inf_{x != 0} |f(x) / x|``; positive only for the linear kind."""
        return abs(self.slope) if self.offset == 0 else 0.0

    def to_dict(self):
        out = {"kind": self.kind}
        if self.kind in ("linear", "affine"):
            out["lam"] = self.slope
        if self.kind in ("affine", "constant"):
            out["c"] = self.offset
        return out


def eval_coefficient(spec: Coefficient, u):
    """``σ(u)`` or ``b(u)`` for a declared coefficient."""
    return spec(u)


@dataclass(frozen=True)
class Scenario:
    """Coefficients, initial data and the Lipschitz/initial-data constants.

    ``lipschitz_L`` defaults to the smallest admissible value
    ``max(|σ'|, |b'|, |σ(0)|, |b(0)|)`` (0.25 when that is zero, the proof's
    ``4L >= 1`` floor). ``initial_bound_K = ½ ||v1||_1 + sup |v0|``.
    """

    v0: Constant | Cosine | TabulatedDisplacement = field(default_factory=lambda: Constant(1.0))
    v1: ZeroVelocity | IndicatorInterval | TabulatedVelocity = field(default_factory=ZeroVelocity)
    sigma: Coefficient = field(default_factory=Coefficient.zero)
    b: Coefficient = field(default_factory=Coefficient.zero)
    lipschitz_L: float | None = None

    def __post_init__(self):
        floor = self.lipschitz_floor
        if self.lipschitz_L is None:
            object.__setattr__(self, "lipschitz_L", floor if floor > 0 else 0.25)
        elif not (self.lipschitz_L > 0 and self.lipschitz_L >= floor):
            raise ValueError(f"lipschitz_L={self.lipschitz_L} must be positive and >= {floor}")

    @property
    def lipschitz_floor(self) -> float:
        return max(self.sigma.lipschitz, self.b.lipschitz, abs(self.sigma.offset), abs(self.b.offset))

    @property
    def lower_lipschitz_sigma(self) -> float:
        return self.sigma.lower_lipschitz

    @property
    def initial_bound_K(self) -> float:
        return 0.5 * self.v1.l1_norm + self.v0.sup_abs

    def lower_bound_level(self) -> float:
        """The level ``a`` of the lower-bound setting, or ValueError.

        That setting needs ``v0 = constant a > 0``, ``v1 = 0``, ``b = 0`` and a
        linear ``σ`` (so ``L_σ > 0``).
        """
        if not isinstance(self.v0, Constant) or self.v0.a <= 0:
            raise ValueError("lower-bound experiments need v0 = constant(a) with a > 0")
        if not isinstance(self.v1, ZeroVelocity):
            raise ValueError("lower-bound experiments need v1 = zero")
        if not self.b.is_zero:
            raise ValueError("lower-bound experiments need b = zero")
        if self.sigma.kind != "linear" or self.sigma.slope == 0:
            raise ValueError("lower-bound experiments need a nonzero linear sigma")
        return self.v0.a

    def to_dict(self):
        return {"v0": self.v0.to_dict(), "v1": self.v1.to_dict(),
                "sigma": self.sigma.to_dict(), "b": self.b.to_dict(),
                "lipschitz_L": self.lipschitz_L}


def initial_wave(scenario: Scenario, t, x):
    """Free wave ``w(t,x) = ½∫_{x-t}^{x+t} v1 + ½(v0(x+t) + v0(x-t))``."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(t < 0):
        raise ValueError("initial_wave is defined for t >= 0")
    out = 0.5 * scenario.v1.integral(x - t, x + t) + 0.5 * (scenario.v0(x + t) + scenario.v0(x - t))
    return float(out) if np.ndim(out) == 0 else out


def _check_keys(spec: dict, allowed: set, what: str):
    unknown = set(spec) - allowed - {"kind"}
    if unknown:
        raise ValueError(f"unknown {what} field(s): {', '.join(sorted(unknown))}")


def displacement_from_dict(spec: dict):
    kind = spec.get("kind")
    if kind == "constant":
        _check_keys(spec, {"a"}, "v0")
        return Constant(float(spec["a"]))
    if kind == "cosine":
        _check_keys(spec, {"amplitude", "frequency"}, "v0")
        return Cosine(float(spec["amplitude"]), float(spec.get("frequency", 1.0)))
    if kind == "tabulated":
        _check_keys(spec, {"xs", "values"}, "v0")
        return TabulatedDisplacement(tuple(spec["xs"]), tuple(spec["values"]))
    raise ValueError(f"unknown v0 kind {kind!r}")


def velocity_from_dict(spec: dict):
    kind = spec.get("kind")
    if kind == "zero":
        _check_keys(spec, set(), "v1")
        return ZeroVelocity()
    if kind == "indicator":
        _check_keys(spec, {"left", "right"}, "v1")
        return IndicatorInterval(float(spec["left"]), float(spec["right"]))
    if kind == "tabulated":
        _check_keys(spec, {"xs", "values"}, "v1")
        return TabulatedVelocity(tuple(spec["xs"]), tuple(spec["values"]))
    raise ValueError(f"unknown v1 kind {kind!r}")


def coefficient_from_dict(spec: dict) -> Coefficient:
    kind = spec.get("kind")
    _check_keys(spec, {"lam", "c"}, "coefficient")
    if kind == "linear":
        return Coefficient.linear(spec["lam"])
    if kind == "affine":
        return Coefficient.affine(spec["lam"], spec["c"])
    if kind == "constant":
        return Coefficient.constant(spec["c"])
    if kind == "zero":
        return Coefficient.zero()
    raise ValueError(f"unknown coefficient kind {kind!r}")


def scenario_from_dict(spec: dict) -> Scenario:
    _check_keys(spec, {"v0", "v1", "sigma", "b", "lipschitz_L"}, "scenario")
    kw = {}
    if "v0" in spec:
        kw["v0"] = displacement_from_dict(spec["v0"])
    if "v1" in spec:
        kw["v1"] = velocity_from_dict(spec["v1"])
    if "sigma" in spec:
        kw["sigma"] = coefficient_from_dict(spec["sigma"])
    if "b" in spec:
        kw["b"] = coefficient_from_dict(spec["b"])
    if spec.get("lipschitz_L") is not None:
        kw["lipschitz_L"] = float(spec["lipschitz_L"])
    return Scenario(**kw)
