"""Closed-form modal solution of the undamped plucked string."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import StringConfig

DEFAULT_MODE_COUNT = 50


@dataclass(frozen=True)
class ModalExpansion:
    coefficients: np.ndarray  # A_n for n = 1..mode_count, metres
    omegas: np.ndarray  # rad/s
    length: float

    @property
    def mode_count(self) -> int:
        return self.coefficients.size

    @property
    def mode_numbers(self) -> np.ndarray:
        return np.arange(1, self.mode_count + 1)


def triangle_fourier_coefficients(length: float, position: float, amplitude: float,
                                  mode_count: int) -> np.ndarray:
    """Sine-series coefficients of the pluck triangle.

    ``A_n = 2 h L^2 sin(n pi x_p / L) / (pi^2 n^2 x_p (L - x_p))``
    """
    n = np.arange(1, mode_count + 1)
    A = (2.0 * amplitude * length**2 * np.sin(n * np.pi * position / length)
         / (np.pi**2 * n**2 * position * (length - position)))
    if 2 * position == length:
        A[1::2] = 0.0  # sin(n pi / 2) is exactly zero for even n
    return A


def modal_coefficients(config: StringConfig, mode_count: int = DEFAULT_MODE_COUNT) -> ModalExpansion:
    if mode_count < 1:
        raise ValueError("mode_count must be >= 1")
    A = triangle_fourier_coefficients(config.length_m, config.pluck_position_m,
                                      config.pluck_amplitude_m, mode_count)
    n = np.arange(1, mode_count + 1)
    omegas = n * np.pi * config.wave_speed / config.length_m
    return ModalExpansion(A, omegas, config.length_m)


def analytic_displacement(expansion: ModalExpansion, x, t):
    """Truncated modal sum; ``x`` and ``t`` broadcast against each other."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(x < 0) or np.any(x > expansion.length):
        raise ValueError("x must lie in [0, L]")
    shape = np.broadcast(x, t).shape
    xs = np.broadcast_to(x, shape)[..., None]
    ts = np.broadcast_to(t, shape)[..., None]
    k = expansion.mode_numbers * np.pi / expansion.length
    terms = expansion.coefficients * np.cos(expansion.omegas * ts) * np.sin(k * xs)
    out = terms.sum(axis=-1)
    # clamp the ends exactly; sin(n pi) is only ~1e-16 in floating point
    out = np.where((xs[..., 0] == 0) | (xs[..., 0] == expansion.length), 0.0, out)
    return out[()] if out.ndim == 0 else out


def harmonic_frequencies(f1: float, count: int) -> list[float]:
    if f1 <= 0:
        raise ValueError("f1 must be positive")
    return [n * f1 for n in range(1, count + 1)]
