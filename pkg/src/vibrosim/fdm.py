"""Explicit finite-difference solver for the transverse string.

The grid has ``node_count`` nodes including both clamped ends. The first two
time levels both equal the pluck profile (zero initial velocity, no
half-step correction), and each later level follows the three-point
leapfrog recursion, optionally with viscous fluid damping.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import _backend
from .params import DomainError, StringConfig

DIVERGENCE_FACTOR = 1.0e6


class DivergenceError(RuntimeError):
    """The time stepping blew up; ``step`` is the first offending row index."""

    def __init__(self, step: int, solver: str = "fdm"):
        super().__init__(f"{solver} solution diverged at step {step}")
        self.step = step
        self.solver = solver


@dataclass(frozen=True)
class WaveHistory:
    """Time-major nodal displacements, ``data[k, n] = u(x_n, t_k)``."""

    data: np.ndarray
    dt_s: float
    dx_m: float

    @property
    def step_count(self) -> int:
        return self.data.shape[0]

    @property
    def node_count(self) -> int:
        return self.data.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.step_count) * self.dt_s

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.node_count) * self.dx_m

    def scaled(self, factor: float) -> "WaveHistory":
        return WaveHistory(self.data * factor, self.dt_s, self.dx_m)


@dataclass(frozen=True)
class FdmCoefficients:
    """Coefficients of the damped recursion.

    ``gamma`` is ``T dt^2 / dx^2`` (kg/m), so that ``gamma / mu`` is the
    dimensionless Courant-squared number of the undamped scheme.
    """

    gamma: float
    alpha: float
    theta: float
    mu: float

    @property
    def weights(self) -> tuple[float, float, float]:
        """``(a, b, c)`` with ``next = a*(left + right) + b*centre + c*prev``.

        Everything is normalised by ``mu`` first so that at zero damping the
        weights are exactly ``(g, 2*(1 - g), -1)`` with ``g = gamma / mu``.
        """
        g = self.gamma / self.mu
        ra = self.alpha / self.mu
        rt = self.theta / self.mu
        return g / ra, 2.0 * (1.0 - g) / ra, rt / ra


def fdm_coefficients(tension: float, linear_density: float, damping: float,
                     dt: float, dx: float) -> FdmCoefficients:
    alpha = linear_density + damping * dt / 2.0
    if alpha <= 0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    return FdmCoefficients(
        gamma=tension * dt**2 / dx**2,
        alpha=alpha,
        theta=-linear_density + damping * dt / 2.0,
        mu=linear_density,
    )


def coefficients_for(config: StringConfig) -> FdmCoefficients:
    return fdm_coefficients(config.tension_n, config.linear_density, config.damping,
                            config.dt_s, config.dx_m)


def pluck_shape(x, length: float, position: float, amplitude: float) -> np.ndarray:
    """Triangle with apex ``amplitude`` at ``position`` and zero at both ends."""
    x = np.asarray(x, dtype=float)
    rising = amplitude * x / position
    falling = amplitude * (length - x) / (length - position)
    return np.where(x <= position, rising, falling)


def pluck_profile(config: StringConfig) -> np.ndarray:
    x = np.arange(config.node_count) * config.dx_m
    u = pluck_shape(x, config.length_m, config.pluck_position_m, config.pluck_amplitude_m)
    u[0] = 0.0
    u[-1] = 0.0
    return u


def _check_pair(prev, curr):
    prev = np.asarray(prev, dtype=float)
    curr = np.asarray(curr, dtype=float)
    if prev.shape != curr.shape or curr.ndim != 1 or curr.size < 3:
        raise ValueError("prev and curr must be equal-length vectors of at least 3 nodes")
    return prev, curr


def fdm_step_undamped(prev, curr, gamma: float) -> np.ndarray:
    """One undamped leapfrog step; ``gamma`` is ``(c dt / dx)^2``."""
    prev, curr = _check_pair(prev, curr)
    nxt = np.zeros_like(curr)
    nxt[1:-1] = gamma * (curr[:-2] + curr[2:]) + 2.0 * (1.0 - gamma) * curr[1:-1] - prev[1:-1]
    return nxt


def fdm_step_damped(prev, curr, coeffs: FdmCoefficients) -> np.ndarray:
    """One step of the fluid-damped recursion.

    Equivalent to ``gamma/alpha*(left + right) + 2*(mu - gamma)/alpha*centre
    + theta/alpha*prev`` on interior nodes.
    """
    prev, curr = _check_pair(prev, curr)
    if coeffs.alpha <= 0:
        raise DomainError("alpha must be positive")
    a, b, c = coeffs.weights
    nxt = np.zeros_like(curr)
    nxt[1:-1] = a * (curr[:-2] + curr[2:]) + b * curr[1:-1] + c * prev[1:-1]
    return nxt


def cfl_limit(c: float, dx: float) -> float:
    """Largest stable time step of the undamped scheme (Courant number one)."""
    if c <= 0 or dx <= 0:
        raise DomainError("wave speed and dx must be positive")
    return dx / c


def divergence_limit(config: StringConfig) -> float:
    return DIVERGENCE_FACTOR * config.pluck_amplitude_m


def iter_fdm_blocks(config: StringConfig, block_steps: int = 8192,
                    backend: str | None = None) -> Iterator[np.ndarray]:
    """Yield the history in consecutive row blocks without storing all of it.

    The first block holds rows 0 and 1 (both the pluck profile). Blocks are
    reused buffers; copy them if they must outlive the next iteration.
    """
    kernels = _backend.get_kernels(backend)
    a, b, c = coefficients_for(config).weights
    limit = divergence_limit(config)
    u0 = pluck_profile(config)
    prev = u0.copy()
    curr = u0.copy()
    yield np.vstack([u0, u0])
    remaining = config.step_count - 2
    buf = np.empty((min(block_steps, max(remaining, 1)), config.node_count))
    done = 2
    while remaining > 0:
        m = min(remaining, buf.shape[0])
        out = buf[:m]
        bad = kernels.fdm_advance(prev, curr, out, a, b, c, limit)
        if bad >= 0:
            raise DivergenceError(done + bad, "fdm")
        yield out
        done += m
        remaining -= m


def simulate_fdm(config: StringConfig, backend: str | None = None) -> WaveHistory:
    """Run the finite-difference solver and keep the full history."""
    kernels = _backend.get_kernels(backend)
    a, b, c = coefficients_for(config).weights
    data = np.empty((config.step_count, config.node_count))
    data[0] = pluck_profile(config)
    data[1] = data[0]
    prev = data[0].copy()
    curr = data[1].copy()
    bad = kernels.fdm_advance(prev, curr, data[2:], a, b, c, divergence_limit(config))
    if bad >= 0:
        raise DivergenceError(2 + bad, "fdm")
    return WaveHistory(data, config.dt_s, config.dx_m)
