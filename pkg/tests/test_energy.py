import numpy as np
import pytest

from vibrosim.energy import energy_series, relative_drift
from vibrosim.fdm import simulate_fdm
from vibrosim.fem import simulate_fem
from vibrosim.params import REAL_GUITAR_B3, SWEEP_REFERENCE


def at_gamma(gamma, steps=10_002):
    cfg = SWEEP_REFERENCE
    dt = np.sqrt(gamma) * cfg.dx_m / cfg.wave_speed
    return cfg.replace(dt_s=dt, step_count=steps)


def test_staggered_form_matches_spec_sum():
    cfg = at_gamma(0.5, 50)
    U = simulate_fdm(cfg).data
    mu, T, dx, dt = cfg.linear_density, cfg.tension_n, cfg.dx_m, cfg.dt_s
    by_hand = [dx * (0.5 * mu * np.sum(((U[k + 1] - U[k]) / dt) ** 2)
                     + 0.5 * T * np.sum((np.diff(U[k]) / dx) ** 2)) for k in range(49)]
    np.testing.assert_allclose(energy_series(U, cfg, "fdm", "staggered"), by_hand, rtol=1e-12)


def test_initial_energy_is_strain_energy_of_the_pluck():
    cfg = at_gamma(0.5, 10)
    U = simulate_fdm(cfg).data
    strain = 0.5 * cfg.tension_n / cfg.dx_m * np.sum(np.diff(U[0]) ** 2)
    assert energy_series(U, cfg, "fdm")[0] == pytest.approx(strain, rel=1e-14)


@pytest.mark.parametrize("solver,sim,gamma", [("fdm", simulate_fdm, 0.5),
                                              ("fem", simulate_fem, 0.25)])
def test_leapfrog_energy_is_conserved(solver, sim, gamma):
    cfg = at_gamma(gamma)
    assert relative_drift(energy_series(sim(cfg), cfg, solver)) < 1e-10


def test_staggered_energy_oscillates_by_percent_level():
    cfg = at_gamma(0.5)
    drift = relative_drift(energy_series(simulate_fdm(cfg), cfg, "fdm", "staggered"))
    assert 0.01 < drift < 0.1


@pytest.mark.parametrize("solver,sim", [("fdm", simulate_fdm)])
def test_damped_energy_never_increases(solver, sim):
    cfg = REAL_GUITAR_B3.replace(step_count=5000)
    e = energy_series(sim(cfg), cfg, solver)
    assert np.all(np.diff(e) <= 1e-12 * e[0])
    assert e[-1] < e[0]


def test_argument_checks():
    cfg = at_gamma(0.5, 10)
    U = simulate_fdm(cfg).data
    with pytest.raises(ValueError):
        energy_series(U, cfg, "fdm", "exotic")
    with pytest.raises(ValueError):
        energy_series(U, cfg, "spectral")
    with pytest.raises(ValueError):
        energy_series(U[:1], cfg, "fdm")
    with pytest.raises(ValueError):
        relative_drift([0.0, 1.0])
