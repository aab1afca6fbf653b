"""Analytical modal model of a thin hemispherical bell.

Mode ``(m0, n0)`` has azimuthal order ``m0`` and a polar shape
``(sin theta)^m0 * p(cos theta)`` where ``p`` is a polynomial of degree
``n0`` built from the associated-Legendre power-series recurrence. The
eigenvalue depends only on ``k = m0 + n0``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .params import BellConfig, DomainError

DIVERGENT_SERIES = 1.0e6


class OverdampedModeError(DomainError):
    def __init__(self, k: int):
        super().__init__(f"mode k={k} is overdamped: no oscillating frequency")
        self.k = k


@dataclass(frozen=True)
class ShellCoefficients:
    alpha_stiff: float  # D / (rho h R^4), 1/s^2
    gamma_att: float  # sigma / (2 rho h), 1/s


def shell_coefficients(config: BellConfig) -> ShellCoefficients:
    rho_h = config.density * config.thickness_m
    return ShellCoefficients(
        alpha_stiff=config.bending_rigidity / (rho_h * config.radius_m**4),
        gamma_att=config.damping_sigma / (2.0 * rho_h),
    )


def mode_frequency(coeffs: ShellCoefficients, k: int) -> float:
    """Damped modal frequency ``sqrt(alpha k^2 (k+1)^2 - gamma^2) / (2 pi)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    radicand = coeffs.alpha_stiff * k**2 * (k + 1) ** 2 - coeffs.gamma_att**2
    if radicand <= 0:
        raise OverdampedModeError(k)
    return math.sqrt(radicand) / (2.0 * math.pi)


def _recurrence_terms(n: int, m0: int, omega_sq):
    """Numerator and denominator of ``a_{n+2} / a_n``."""
    return n * n + n * (2 * m0 + 1) + m0 * (m0 + 1) - omega_sq, (n + 2) * (n + 1)


def _next(a, n: int, m0: int, omega_sq):
    num, den = _recurrence_terms(n, m0, omega_sq)
    return a * num / den  # keeps Fraction seeds exact


def legendre_coefficients(m0: int, n0: int, a0=1, a1=0) -> list:
    """Coefficients ``a_0 .. a_n0`` of the terminating polynomial ``p_n0``.

    Uses ``Omega^2 = k (k + 1)`` with ``k = m0 + n0``. Coefficients of the
    parity opposite to ``n0`` are zero; seed ``a0`` for even ``n0`` and
    ``a1`` for odd ``n0``. Works with ``fractions.Fraction`` seeds for exact
    arithmetic.
    """
    if m0 < 0 or n0 < 0:
        raise ValueError("m0 and n0 must be nonnegative")
    if n0 % 2 == 0:
        if a1 != 0 or a0 == 0:
            raise ValueError("even n0 needs a nonzero a0 and a1 = 0")
        start, seed = 0, a0
    else:
        if a0 != 0 or a1 == 0:
            raise ValueError("odd n0 needs a nonzero a1 and a0 = 0")
        start, seed = 1, a1
    k = m0 + n0
    omega_sq = k * (k + 1)
    coeffs = [seed * 0] * (n0 + 1)
    coeffs[start] = seed
    for n in range(start, n0 - 1, 2):
        coeffs[n + 2] = _next(coeffs[n], n, m0, omega_sq)
    return coeffs


def next_coefficient_after(coeffs: Sequence, m0: int) -> object:
    """The coefficient the recurrence would produce after the last one (zero for a terminating series)."""
    n0 = len(coeffs) - 1
    k = m0 + n0
    return _next(coeffs[n0], n0, m0, k * (k + 1))


def p_at_one(m0: int, omega: float, truncation: int, parity: str = "even") -> float:
    """Partial sum ``sum_{n <= truncation} a_n`` of the series at ``x = 1``.

    ``omega`` need not be a terminating value. The series is seeded with
    ``a0 = 1`` (``parity="even"``) or ``a1 = 1`` (``parity="odd"``).
    """
    if truncation < 2:
        raise ValueError("truncation must be >= 2")
    n = 0 if parity == "even" else 1
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    omega_sq = omega * omega
    a = 1.0
    total = 0.0
    while n <= truncation:
        total += a
        a = _next(a, n, m0, omega_sq)
        if a == 0.0:
            break
        n += 2
    return total


def scan_p_at_one(m0: int, omegas, truncation: int = 200, parity: str = "even"):
    """Evaluate :func:`p_at_one` over a grid.

    Returns ``(values, divergent, crossings)`` where ``divergent`` flags
    partial sums above ``1e6`` in magnitude and ``crossings`` are linearly
    interpolated sign changes of ``p(1)``.
    """
    omegas = np.asarray(omegas, dtype=float)
    values = np.array([p_at_one(m0, w, truncation, parity) for w in omegas])
    divergent = np.abs(values) > DIVERGENT_SERIES
    s = np.sign(values)
    idx = np.flatnonzero((s[:-1] * s[1:] < 0) & ~divergent[:-1] & ~divergent[1:])
    crossings = omegas[idx] - values[idx] * (omegas[idx + 1] - omegas[idx]) / (values[idx + 1] - values[idx])
    return values, divergent, crossings


def terminating_omegas(m0: int, k_max: int) -> np.ndarray:
    return np.array([math.sqrt(k * (k + 1)) for k in range(m0, k_max + 1)])


@dataclass(frozen=True)
class BellMode:
    m0: int
    n0: int
    frequency_hz: float
    attenuation: float
    shape_coeffs: tuple

    @property
    def k(self) -> int:
        return self.m0 + self.n0

    @property
    def omega_cap(self) -> float:
        return math.sqrt(self.k * (self.k + 1))


def default_mode_indices(k: int) -> tuple[int, int]:
    """Smallest ``m0 >= 1`` with even ``n0 = k - m0``.

    ``m0 >= 1`` keeps the crown clamped and even ``n0`` gives zero slope
    at the rim.
    """
    m0 = 2 if k % 2 == 0 else 1
    if k < m0:
        raise ValueError(f"no clamped/free mode with k={k}")
    return m0, k - m0


def make_mode(config: BellConfig | ShellCoefficients, m0: int, n0: int) -> BellMode:
    coeffs = shell_coefficients(config) if isinstance(config, BellConfig) else config
    k = m0 + n0
    shape = legendre_coefficients(m0, n0, 1.0, 0.0) if n0 % 2 == 0 else \
        legendre_coefficients(m0, n0, 0.0, 1.0)
    return BellMode(m0, n0, mode_frequency(coeffs, k), coeffs.gamma_att, tuple(shape))


def bell_modes(config: BellConfig, k_values: Sequence[int]) -> list[BellMode]:
    return [make_mode(config, *default_mode_indices(k)) for k in k_values]


def mode_shape(mode: BellMode, theta, phi):
    """Real mode shape ``(sin theta)^m0 p(cos theta) cos(m0 phi)``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    p = np.polynomial.polynomial.polyval(np.cos(theta), np.asarray(mode.shape_coeffs, dtype=float))
    return np.sin(theta) ** mode.m0 * p * np.cos(mode.m0 * phi)


def synthesize_bell(modes: Sequence[tuple[BellMode, float]], duration: float,
                    sample_rate: float) -> np.ndarray:
    """Sum of exponentially decaying cosines, one per mode, in list order."""
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    out = np.zeros(n)
    for mode, amplitude in modes:
        if mode.frequency_hz >= sample_rate / 2:
            raise ValueError(
                f"mode k={mode.k} at {mode.frequency_hz:.1f} Hz aliases at {sample_rate} Hz")
        out += amplitude * np.exp(-mode.attenuation * t) * np.cos(2 * np.pi * mode.frequency_hz * t)
    return out


def write_mode_table(modes: Sequence[BellMode], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m0", "n0", "k", "frequency_hz", "attenuation"])
        for m in modes:
            w.writerow([m.m0, m.n0, m.k, format(m.frequency_hz, ".9g"),
                        format(m.attenuation, ".9g")])


# --- discrete surface biharmonic -------------------------------------------
#
# Grid convention: rows are theta_i = (i + 1) * dtheta, i = 0 .. n - 1, with
# the last row on the rim (theta = pi/2); columns are phi_j = j * dphi over
# a full turn. Two ghost rows are added on each side: towards the crown the
# pole value and the row continued through the pole (theta -> -theta,
# phi -> phi + pi); past the rim the free-edge mirror image.


def _with_ghosts(field: np.ndarray, pole_value: float) -> np.ndarray:
    n, m = field.shape
    ext = np.empty((n + 4, m))
    ext[2:n + 2] = field
    ext[1] = pole_value
    ext[0] = np.roll(field[0], m // 2)
    ext[n + 2] = field[n - 2]
    ext[n + 3] = field[n - 3]
    return ext


def _check_grid(field: np.ndarray, dtheta: float, dphi: float, theta_start: float | None):
    if field.ndim != 2:
        raise ValueError("field must be a (theta, phi) grid")
    n, m = field.shape
    start = dtheta if theta_start is None else theta_start
    if start <= 0:
        raise DomainError("the grid must not touch the pole (theta = 0)")
    if not math.isclose(start, dtheta, rel_tol=1e-9):
        raise ValueError("the first grid row must sit one dtheta from the pole")
    if n < 3 or not math.isclose(n * dtheta, math.pi / 2, rel_tol=1e-9):
        raise ValueError("theta rows must run from dtheta to pi/2 in steps of dtheta")
    if m % 2 or not math.isclose(m * dphi, 2 * math.pi, rel_tol=1e-9):
        raise ValueError("phi columns must cover a full turn with an even count")


def biharmonic_terms(field, dtheta: float, dphi: float, pole_value: float = 0.0,
                     theta_start: float | None = None) -> dict[str, np.ndarray]:
    """Finite-difference partial derivatives used by :func:`biharmonic_apply`."""
    field = np.asarray(field, dtype=float)
    _check_grid(field, dtheta, dphi, theta_start)
    n = field.shape[0]
    ext = _with_ghosts(field, pole_value)
    h, q = dtheta, dphi

    def T(s):  # shift along theta
        return ext[2 + s:2 + s + n]

    def P(x, s):  # shift along phi, periodic
        return np.roll(x, -s, axis=1)

    u = T(0)
    d2t = T(1) - 2 * u + T(-1)  # unscaled second difference in theta
    d2p = P(u, 1) - 2 * u + P(u, -1)  # unscaled second difference in phi
    d2p_up = P(T(1), 1) - 2 * T(1) + P(T(1), -1)
    d2p_dn = P(T(-1), 1) - 2 * T(-1) + P(T(-1), -1)
    return {
        "t": (T(1) - T(-1)) / (2 * h),
        "tt": d2t / h**2,
        "pp": d2p / q**2,
        "ttt": (T(2) - T(-2) - 2 * (T(1) - T(-1))) / (2 * h**3),
        "tttt": (T(2) + T(-2) - 4 * T(1) - 4 * T(-1) + 6 * u) / h**4,
        "pppp": (P(u, 2) + P(u, -2) - 4 * P(u, 1) - 4 * P(u, -1) + 6 * u) / q**4,
        "ptt": (P(d2t, 1) - P(d2t, -1)) / (2 * q * h**2),
        "tpp": (d2p_up - d2p_dn) / (2 * q**2 * h),
        "ttpp": (P(d2t, 1) - 2 * d2t + P(d2t, -1)) / (q**2 * h**2),
    }


def biharmonic_apply(field, dtheta: float, dphi: float, radius: float = 1.0,
                     pole_value: float = 0.0, theta_start: float | None = None) -> np.ndarray:
    """Surface biharmonic of ``field`` on the hemisphere of ``radius``.

    ``pole_value`` is the (clamped) crown displacement used by the first
    rows' stencils.
    """
    d = biharmonic_terms(field, dtheta, dphi, pole_value, theta_start)
    n = d["t"].shape[0]
    theta = (np.arange(n) + 1) * dtheta
    s = np.sin(theta)[:, None]
    c = np.cos(theta)[:, None]
    cot = c / s
    s2 = s * s
    s4 = s2 * s2
    out = (d["tttt"] + 2 * cot * d["ttt"] + (c * c - 2) / s2 * d["tt"] + cot / s2 * d["t"]
           + d["pppp"] / s4 + 2 * (1 + c * c) / s4 * d["pp"]
           + 2 / s2 * d["ttpp"] - 2 * cot / s2 * d["tpp"])
    return out / radius**4


def hemisphere_grid(n_theta: int, n_phi: int):
    """``(theta, phi, dtheta, dphi)`` matching the :func:`biharmonic_apply` layout."""
    dtheta = (math.pi / 2) / n_theta
    dphi = 2 * math.pi / n_phi
    theta = (np.arange(n_theta) + 1) * dtheta
    phi = np.arange(n_phi) * dphi
    return theta, phi, dtheta, dphi
