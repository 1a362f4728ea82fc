"""Lattice solvers for the mild wave equation with Lévy noise.

On the lattice ``Δt = Δx = Δ`` the backward light cone of a node is a union
of whole cells and of cells cut in half along a diagonal, so the discrete
Duhamel term is exact bookkeeping of cell fractions::

    u(t_n, x_k) = w(t_n, x_k) + ½ Σ_cells frac_c(n, k) F_c

where ``frac_c`` is 1 inside the cone, ½ on the cone boundary and 0 outside,
and the cell forcing is

    F_c = ½[σ(u(t_j, x_i)) + σ(u(t_j, x_{i+1}))] ΔL_c + ½[b(u(t_j, x_i)) + b(u(t_j, x_{i+1}))] Δ².

Coefficients are read off the lower time level of the cell only. This is the
lattice form of predictability: ``F_c`` is independent of ``ΔL_c``, so the
noise term keeps mean zero and the isometry holds cell by cell.

``ConeSum`` evaluates the sum directly. ``Diamond`` uses the identity
``cone(t+Δ, x) = cone(t, x+Δ) ∪ cone(t, x-Δ) ∪ diamond(t, x)`` with overlap
``cone(t-Δ, x)``, which regroups the same sum into an O(1) update per node.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .fields import Scenario, initial_wave
from .geometry import GridGeometry
from .prm import NoiseField


class Scheme(str, enum.Enum):
    CONE_SUM = "cone_sum"
    DIAMOND = "diamond"


@dataclass(frozen=True)
class GridSolution:
    """Field values ``values[j, i] ≈ u(t_j, x_i)`` on the observation window."""

    geometry: GridGeometry
    values: np.ndarray
    scheme: Scheme
    scenario: Scenario
    noise_id: tuple | None = None

    @property
    def t(self) -> np.ndarray:
        return self.geometry.t_nodes

    @property
    def x(self) -> np.ndarray:
        return self.geometry.x_window

    def at(self, t: float, x: float) -> float:
        return float(self.values[self.geometry.time_index(t), self.geometry.window_index(x)])


def _free_wave(scenario: Scenario, geometry: GridGeometry) -> np.ndarray:
    t = geometry.t_nodes[:, None]
    return initial_wave(scenario, t, geometry.x_nodes[None, :])


def _forcing(scenario: Scenario, u_row: np.ndarray, dL_row: np.ndarray, delta: float) -> np.ndarray:
    """Cell forcing from node values on the cell's lower time level."""
    s = scenario.sigma(u_row)
    out = 0.5 * (s[..., :-1] + s[..., 1:]) * dL_row
    if not scenario.b.is_zero:
        b = scenario.b(u_row)
        out = out + 0.5 * (b[..., :-1] + b[..., 1:]) * delta ** 2
    return out


def _cone_weights(m: int) -> np.ndarray:
    """Kernel weights ``½ frac`` for the cells of the row ``m`` steps below the apex.

    Cells ``k-m, ..., k+m-1`` relative to the apex node ``k``.
    """
    w = np.full(2 * m, 0.5)
    w[0] = w[-1] = 0.25
    return w


def _cone_row(F_rows: list, n: int, n_cells: int) -> np.ndarray:
    """Duhamel term at time level ``n`` for nodes ``n..N-n`` (NaN elsewhere)."""
    shape = F_rows[0].shape[:-1] + (n_cells + 1,)
    z = np.full(shape, np.nan)
    lo, hi = n, n_cells - n
    if hi < lo:
        return z
    acc = np.zeros(shape[:-1] + (hi - lo + 1,))
    for j in range(n):
        m = n - j
        win = sliding_window_view(F_rows[j], 2 * m, axis=-1)
        # window start s covers cells s..s+2m-1, i.e. apex node s+m
        acc += win[..., lo - m:hi - m + 1, :] @ _cone_weights(m)
    z[..., lo:hi + 1] = acc
    return z


def _check(geometry: GridGeometry, increments: np.ndarray):
    if increments.shape[-2:] != geometry.noise_shape:
        raise ValueError(f"noise of shape {increments.shape[-2:]} does not cover the grid "
                         f"{geometry.noise_shape}")


def _diamond(scenario: Scenario, geometry: GridGeometry, dL: np.ndarray) -> np.ndarray:
    """Diamond recursion; ``dL`` has shape ``(..., M, N)``. Returns window values."""
    M, N, d = geometry.n_steps, geometry.n_cells, geometry.delta
    w = _free_wave(scenario, geometry)
    lead = dL.shape[:-2]
    win = geometry.window_slice
    out = np.empty(lead + (M + 1, win.stop - win.start))
    u = np.broadcast_to(w[0], lead + (N + 1,)).copy()
    out[..., 0, :] = u[..., win]
    z_prev = None
    z = np.zeros(lead + (N + 1,))
    F_prev = None
    F = _forcing(scenario, u, dL[..., 0, :], d)
    for j in range(M):
        z_next = np.full(lead + (N + 1,), np.nan)
        if j == 0:
            z_next[..., 1:-1] = 0.25 * (F[..., :-1] + F[..., 1:])
        else:
            z_next[..., 1:-1] = (z[..., 2:] + z[..., :-2] - z_prev[..., 1:-1]
                                 + 0.25 * (F_prev[..., :-1] + F_prev[..., 1:]
                                           + F[..., :-1] + F[..., 1:]))
        z_prev, z = z, z_next
        u = w[j + 1] + z
        out[..., j + 1, :] = u[..., win]
        if j + 1 < M:
            F_prev, F = F, _forcing(scenario, u, dL[..., j + 1, :], d)
    return out


def _cone_sum(scenario: Scenario, geometry: GridGeometry, dL: np.ndarray) -> np.ndarray:
    M, N, d = geometry.n_steps, geometry.n_cells, geometry.delta
    w = _free_wave(scenario, geometry)
    lead = dL.shape[:-2]
    win = geometry.window_slice
    out = np.empty(lead + (M + 1, win.stop - win.start))
    u = np.broadcast_to(w[0], lead + (N + 1,)).copy()
    out[..., 0, :] = u[..., win]
    F_rows = []
    for n in range(1, M + 1):
        F_rows.append(_forcing(scenario, u, dL[..., n - 1, :], d))
        u = w[n] + _cone_row(F_rows, n, N)
        out[..., n, :] = u[..., win]
    return out


def simulate_increments(scenario: Scenario, geometry: GridGeometry, increments: np.ndarray,
                        scheme: Scheme | str = Scheme.DIAMOND) -> np.ndarray:
    """Window values for one or many noise arrays of shape ``(..., M, N)``."""
    increments = np.asarray(increments, dtype=float)
    _check(geometry, increments)
    if Scheme(scheme) is Scheme.DIAMOND:
        return _diamond(scenario, geometry, increments)
    return _cone_sum(scenario, geometry, increments)


def simulate(scenario: Scenario, geometry: GridGeometry, noise: NoiseField,
             scheme: Scheme | str = Scheme.DIAMOND) -> GridSolution:
    """Solve the lattice mild equation driven by ``noise``."""
    if noise.geometry != geometry:
        raise ValueError("noise field was sampled for a different grid")
    scheme = Scheme(scheme)
    values = simulate_increments(scenario, geometry, noise.increments, scheme)
    return GridSolution(geometry, values, scheme, scenario, (noise.seed, noise.replicate))


def picard_sequence(scenario: Scenario, geometry: GridGeometry, noise: NoiseField,
                    n_max: int) -> list[GridSolution]:
    """Picard iterates ``u_0 = w, u_{n+1} = w + G*(σ(u_n) dL) + G*(b(u_n))``.

    Each iterate is one full cone-sum sweep with the forcing frozen at the
    previous iterate. Returns ``[u_0, ..., u_{n_max}]`` on the window.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if noise.geometry != geometry:
        raise ValueError("noise field was sampled for a different grid")
    M, N, d = geometry.n_steps, geometry.n_cells, geometry.delta
    dL = noise.increments
    w = _free_wave(scenario, geometry)
    win = geometry.window_slice
    noise_id = (noise.seed, noise.replicate)
    u = w.copy()
    iterates = [GridSolution(geometry, u[:, win].copy(), Scheme.CONE_SUM, scenario, noise_id)]
    for _ in range(n_max):
        F_rows = [_forcing(scenario, u[j], dL[j], d) for j in range(M)]
        nxt = w.copy()
        for n in range(1, M + 1):
            nxt[n] += _cone_row(F_rows, n, N)
        u = nxt
        iterates.append(GridSolution(geometry, u[:, win].copy(), Scheme.CONE_SUM, scenario, noise_id))
    return iterates


def picard_differences(iterates: list[GridSolution]) -> np.ndarray:
    """Sup-norm gaps ``d_n = max |u_{n+1} - u_n|`` on the window."""
    return np.array([np.max(np.abs(b.values - a.values)) for a, b in zip(iterates, iterates[1:])])
