"""Cone-aligned space-time lattice shared by the noise sampler and the solvers."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


def _as_count(value: float, what: str) -> int:
    n = round(value)
    if abs(value - n) > 1e-9 * max(1.0, abs(value)):
        raise ValueError(f"{what} must be an integer multiple of the step, got ratio {value}")
    return int(n)


@dataclass(frozen=True)
class GridGeometry:
    """Lattice with ``Δt = Δx = delta`` on ``[0, T] x [-K - T, K + T]``.

    The observation window is ``[-K, K]``. Because the wave kernel vanishes
    outside the light cone, values on the window at times ``<= T`` depend only
    on noise inside the enlarged strip, so truncating there is exact.
    """

    T: float
    K: float
    delta: float

    def __post_init__(self):
        if not (self.T > 0 and self.K >= 0 and self.delta > 0):
            raise ValueError("need T > 0, K >= 0 and delta > 0")
        _as_count(self.T / self.delta, "T")
        _as_count((2 * self.K + 2 * self.T) / self.delta, "2K + 2T")

    @cached_property
    def n_steps(self) -> int:
        """Number of time steps ``M = T / delta``."""
        return _as_count(self.T / self.delta, "T")

    @cached_property
    def n_cells(self) -> int:
        """Number of spatial cells ``N`` across the enlarged strip."""
        return _as_count((2 * self.K + 2 * self.T) / self.delta, "2K + 2T")

    @property
    def x_min(self) -> float:
        return -self.K - self.T

    @property
    def t_nodes(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.delta

    @property
    def x_nodes(self) -> np.ndarray:
        """All ``N + 1`` spatial nodes of the enlarged strip."""
        return self.x_min + np.arange(self.n_cells + 1) * self.delta

    @property
    def window_slice(self) -> slice:
        """Node indices of the observation window ``[-K, K]``."""
        return slice(self.n_steps, self.n_cells - self.n_steps + 1)

    @property
    def x_window(self) -> np.ndarray:
        return self.x_nodes[self.window_slice]

    @property
    def noise_shape(self) -> tuple[int, int]:
        return (self.n_steps, self.n_cells)

    def window_index(self, x: float) -> int:
        """Index into :attr:`x_window` of the node nearest to ``x``."""
        i = int(np.argmin(np.abs(self.x_window - x)))
        if abs(self.x_window[i] - x) > 1e-9:
            raise ValueError(f"x={x} is not a lattice node of the window")
        return i

    def time_index(self, t: float) -> int:
        return _as_count(t / self.delta, "t")

    def to_dict(self) -> dict:
        return {"T": self.T, "K": self.K, "delta": self.delta}
