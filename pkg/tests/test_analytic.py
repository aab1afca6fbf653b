import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from vibrosim.analytic import (analytic_displacement, harmonic_frequencies, modal_coefficients,
                               triangle_fourier_coefficients)
from vibrosim.fdm import pluck_profile, pluck_shape
from vibrosim.params import NYLON_B3, StringConfig


def test_midpoint_pluck_has_no_even_modes():
    a = triangle_fourier_coefficients(0.65, 0.325, 3e-4, 40)
    assert np.all(a[1::2] == 0.0)
    assert np.all(a[0::2] != 0.0)


def test_first_coefficient_unit_triangle():
    assert triangle_fourier_coefficients(1.0, 0.5, 1.0, 1)[0] == pytest.approx(8 / np.pi**2)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.95), st.integers(1, 12))
def test_coefficients_match_quadrature(frac, n):
    """A_n = 2/L * integral of the triangle times sin(n pi x / L)."""
    length, amp = 0.8, 2e-3
    pos = frac * length

    def integrand(x):
        return pluck_shape(x, length, pos, amp) * np.sin(n * np.pi * x / length)

    oracle = 2 / length * quad(integrand, 0, length, points=[pos], limit=200)[0]
    got = triangle_fourier_coefficients(length, pos, amp, n)[-1]
    assert got == pytest.approx(oracle, rel=1e-7, abs=1e-14)


def test_coefficients_decay_like_inverse_square():
    a = triangle_fourier_coefficients(0.65, 0.18, 3e-4, 500)
    n = np.arange(1, 501)
    assert np.max(np.abs(a) * n**2) <= 2 * 3e-4 * 0.65**2 / (np.pi**2 * 0.18 * 0.47)


def test_modal_frequencies():
    e = modal_coefficients(NYLON_B3, 5)
    np.testing.assert_allclose(e.omegas / (2 * np.pi), NYLON_B3.fundamental_hz * np.arange(1, 6))
    with pytest.raises(ValueError):
        modal_coefficients(NYLON_B3, 0)


def test_ends_are_fixed():
    e = modal_coefficients(NYLON_B3)
    t = np.linspace(0, 0.01, 7)
    assert not analytic_displacement(e, 0.0, t).any()
    assert not analytic_displacement(e, NYLON_B3.length_m, t).any()


def test_initial_shape_reconstruction_improves_with_modes():
    cfg = NYLON_B3
    x = np.linspace(0, cfg.length_m, 81)
    target = pluck_profile(cfg)
    errs = [np.max(np.abs(analytic_displacement(modal_coefficients(cfg, m), x, 0.0) - target))
            for m in (25, 50, 200)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.01 * cfg.pluck_amplitude_m


def test_period_two_l_over_c():
    cfg = NYLON_B3
    e = modal_coefficients(cfg)
    x = np.linspace(0, cfg.length_m, 33)
    period = 2 * cfg.length_m / cfg.wave_speed
    np.testing.assert_allclose(analytic_displacement(e, x, period),
                               analytic_displacement(e, x, 0.0), atol=1e-15)


def test_broadcasting_and_domain():
    e = modal_coefficients(StringConfig(1.0, 1.0, 1.0, 0.3), 10)
    out = analytic_displacement(e, np.linspace(0, 1, 4)[:, None], np.linspace(0, 1, 3)[None, :])
    assert out.shape == (4, 3)
    assert np.ndim(analytic_displacement(e, 0.5, 0.1)) == 0
    with pytest.raises(ValueError):
        analytic_displacement(e, 1.5, 0.0)


def test_harmonic_frequencies():
    assert harmonic_frequencies(247, 3) == [247, 494, 741]
    assert harmonic_frequencies(246.98, 5)[4] == pytest.approx(1234.9)
    assert harmonic_frequencies(100.0, 1) == [100.0]
    with pytest.raises(ValueError):
        harmonic_frequencies(0.0, 3)
