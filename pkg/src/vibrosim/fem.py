"""Linear two-node finite elements with central-difference time stepping.

Global matrices are symmetric tridiagonal and are stored as three bands
(``sub[i] = A[i, i-1]``, ``diag[i] = A[i, i]``, ``sup[i] = A[i, i+1]``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import _backend
from .fdm import DivergenceError, WaveHistory, divergence_limit, pluck_profile
from .params import StringConfig

log = logging.getLogger(__name__)


def local_mass(linear_density: float, dx: float) -> np.ndarray:
    """Consistent mass matrix of one element."""
    return linear_density * dx / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])


def local_stiffness(tension: float, dx: float) -> np.ndarray:
    return tension / dx * np.array([[1.0, -1.0], [-1.0, 1.0]])


@dataclass(frozen=True)
class Tridiagonal:
    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    @property
    def size(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sub[1:], -1) + np.diag(self.sup[:-1], 1)

    def matvec(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = self.diag * v
        out[:-1] += self.sup[:-1] * v[1:]
        out[1:] += self.sub[1:] * v[:-1]
        return out

    def interior(self) -> np.ndarray:
        """Dense block of the interior rows and columns."""
        return self.dense()[1:-1, 1:-1]


@dataclass(frozen=True)
class GlobalSystem:
    mass: Tridiagonal
    stiffness: Tridiagonal
    boundary_applied: bool


def _assemble(n: int, local: np.ndarray) -> Tridiagonal:
    diag = np.zeros(n)
    sub = np.zeros(n)
    sup = np.zeros(n)
    for e in range(n - 1):
        diag[e] += local[0, 0]
        diag[e + 1] += local[1, 1]
        sup[e] += local[0, 1]
        sub[e + 1] += local[1, 0]
    return Tridiagonal(sub, diag, sup)


def _fix_ends(m: Tridiagonal) -> Tridiagonal:
    sub, diag, sup = m.sub.copy(), m.diag.copy(), m.sup.copy()
    # zero first/last rows and columns, unit diagonal
    sup[0] = 0.0
    sub[1] = 0.0
    sub[-1] = 0.0
    sup[-2] = 0.0
    diag[0] = 1.0
    diag[-1] = 1.0
    return Tridiagonal(sub, diag, sup)


def assemble_global(config: StringConfig, apply_boundary: bool = True) -> GlobalSystem:
    n = config.node_count
    dx = config.dx_m
    mass = _assemble(n, local_mass(config.linear_density, dx))
    stiffness = _assemble(n, local_stiffness(config.tension_n, dx))
    if apply_boundary:
        mass, stiffness = _fix_ends(mass), _fix_ends(stiffness)
    return GlobalSystem(mass, stiffness, apply_boundary)


def fem_step(prev, curr, system: GlobalSystem, dt: float) -> np.ndarray:
    """``2 curr - prev - dt^2 M^{-1} K curr`` with the ends forced to zero."""
    from scipy.linalg import solve_banded

    prev = np.asarray(prev, dtype=float)
    curr = np.asarray(curr, dtype=float)
    if prev.shape != curr.shape or curr.size != system.mass.size:
        raise ValueError("state vectors must match the system dimension")
    m = system.mass
    ab = np.vstack([np.r_[0.0, m.sup[:-1]], m.diag, np.r_[m.sub[1:], 0.0]])
    y = solve_banded((1, 1), ab, system.stiffness.matvec(curr))
    nxt = 2.0 * curr - prev - dt**2 * y
    nxt[0] = 0.0
    nxt[-1] = 0.0
    return nxt


def _prepare(config: StringConfig, backend: str | None):
    if config.damping:
        log.warning("the element solver is undamped; damping=%g is ignored", config.damping)
    kernels = _backend.get_kernels(backend)
    system = assemble_global(config)
    m, k = system.mass, system.stiffness
    factor = kernels.factor_mass(m.sub, m.diag, m.sup)
    return kernels, k, factor


def iter_fem_blocks(config: StringConfig, block_steps: int = 8192,
                    backend: str | None = None) -> Iterator[np.ndarray]:
    """Streaming counterpart of :func:`simulate_fem`; see ``iter_fdm_blocks``."""
    kernels, k, factor = _prepare(config, backend)
    dt2 = config.dt_s**2
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
        bad = kernels.fem_advance(prev, curr, out, k.sub, k.diag, k.sup, factor, dt2, limit)
        if bad >= 0:
            raise DivergenceError(done + bad, "fem")
        yield out
        done += m
        remaining -= m


def simulate_fem(config: StringConfig, backend: str | None = None) -> WaveHistory:
    kernels, k, factor = _prepare(config, backend)
    data = np.empty((config.step_count, config.node_count))
    data[0] = pluck_profile(config)
    data[1] = data[0]
    prev = data[0].copy()
    curr = data[1].copy()
    bad = kernels.fem_advance(prev, curr, data[2:], k.sub, k.diag, k.sup, factor,
                              config.dt_s**2, divergence_limit(config))
    if bad >= 0:
        raise DivergenceError(2 + bad, "fem")
    return WaveHistory(data, config.dt_s, config.dx_m)


def consistent_mass_limit(c: float, dx: float) -> float:
    """Stability bound ``dx / (c sqrt(3))`` of central differences with consistent mass."""
    return dx / (c * np.sqrt(3.0))
