import numpy as np
import pytest
from scipy.linalg import eigh

from vibrosim.fdm import DivergenceError, pluck_profile
from vibrosim.fem import (assemble_global, consistent_mass_limit, fem_step, iter_fem_blocks,
                          local_mass, local_stiffness, simulate_fem)
from vibrosim.params import SWEEP_REFERENCE, StringConfig


def dense_assembly(n, local):
    out = np.zeros((n, n))
    for e in range(n - 1):
        out[e:e + 2, e:e + 2] += local
    return out


def test_local_matrices():
    np.testing.assert_allclose(local_mass(6, 1), [[2, 1], [1, 2]])
    np.testing.assert_allclose(local_mass(5.82e-4, 0.01), 9.7e-7 * np.array([[2, 1], [1, 2]]))
    np.testing.assert_allclose(local_mass(3.0, 0.2), 2 * local_mass(3.0, 0.1))
    np.testing.assert_allclose(local_stiffness(1, 1), [[1, -1], [-1, 1]])
    np.testing.assert_allclose(local_stiffness(60, 0.01), 6000 * np.array([[1, -1], [-1, 1]]))
    assert not local_stiffness(42.0, 0.3).sum(axis=1).any()


@pytest.mark.parametrize("n", [3, 4, 11])
def test_assembly_matches_dense_oracle(n):
    cfg = StringConfig(length_m=n - 1.0, tension_n=1.0, linear_density=6.0,
                       pluck_position_m=0.5, node_count=n)
    free = assemble_global(cfg, apply_boundary=False)
    np.testing.assert_allclose(free.mass.dense(), dense_assembly(n, local_mass(6.0, 1.0)))
    np.testing.assert_allclose(free.stiffness.dense(), dense_assembly(n, local_stiffness(1.0, 1.0)))
    assert free.mass.dense()[1, 1] == pytest.approx(4.0)
    assert np.allclose(free.stiffness.dense().sum(axis=1), 0.0)
    if n > 3:
        np.testing.assert_allclose(free.stiffness.dense()[2, 1:4], [-1, 2, -1])


def test_boundary_rows_are_unit_rows():
    cfg = SWEEP_REFERENCE.replace(node_count=6)
    system = assemble_global(cfg)
    for matrix in (system.mass.dense(), system.stiffness.dense()):
        for i in (0, 5):
            expected = np.zeros(6)
            expected[i] = 1.0
            np.testing.assert_array_equal(matrix[i], expected)
            np.testing.assert_array_equal(matrix[:, i], expected)
    assert system.boundary_applied


def test_interior_eigenvalues_match_closed_form():
    cfg = SWEEP_REFERENCE.replace(node_count=30)
    system = assemble_global(cfg)
    lam = eigh(system.stiffness.interior(), system.mass.interior(), eigvals_only=True)
    n, dx, T, mu = cfg.node_count, cfg.dx_m, cfg.tension_n, cfg.linear_density
    theta = np.arange(1, n - 1) * np.pi / (n - 1)
    closed = 6 * T / (mu * dx**2) * (1 - np.cos(theta)) / (2 + np.cos(theta))
    np.testing.assert_allclose(np.sort(lam), np.sort(closed), rtol=1e-10)
    # stability of central differences: dt^2 * lambda_max < 4
    assert consistent_mass_limit(cfg.wave_speed, dx) == pytest.approx(
        2 / np.sqrt(12 * T / (mu * dx**2)), rel=1e-12)


def test_tridiagonal_matvec_matches_dense(rng):
    system = assemble_global(SWEEP_REFERENCE.replace(node_count=9))
    v = rng.normal(size=9)
    for t in (system.mass, system.stiffness):
        np.testing.assert_allclose(t.matvec(v), t.dense() @ v)


def test_single_interior_node_by_hand():
    cfg = StringConfig(length_m=2.0, tension_n=1.0, linear_density=6.0, pluck_position_m=1.0,
                       pluck_amplitude_m=0.1, node_count=3, dt_s=0.5)
    system = assemble_global(cfg)
    u = pluck_profile(cfg)
    nxt = fem_step(u, u, system, cfg.dt_s)
    # effective scalar system: 4 * a = -2 * u1
    expected = 2 * 0.1 - 0.1 - 0.25 * (2 * 0.1) / 4
    assert nxt.tolist() == pytest.approx([0.0, expected, 0.0])


def test_zero_force_is_linear_extrapolation():
    cfg = SWEEP_REFERENCE.replace(node_count=8)
    system = assemble_global(cfg, apply_boundary=False)
    curr = np.ones(8)
    prev = 0.5 * np.ones(8)
    nxt = fem_step(prev, curr, system, 1e-5)
    np.testing.assert_allclose(nxt[1:-1], 1.5)
    assert nxt[0] == 0.0 and nxt[-1] == 0.0


def test_zero_state_stays_zero():
    system = assemble_global(SWEEP_REFERENCE.replace(node_count=8))
    assert not fem_step(np.zeros(8), np.zeros(8), system, 1e-5).any()


def test_fem_step_rejects_bad_shapes():
    system = assemble_global(SWEEP_REFERENCE.replace(node_count=8))
    with pytest.raises(ValueError):
        fem_step(np.zeros(7), np.zeros(7), system, 1e-5)


def test_simulation_matches_reference_step(small_string):
    h = simulate_fem(small_string)
    system = assemble_global(small_string)
    prev, curr = h.data[0], h.data[1]
    for k in range(2, 80):
        prev, curr = curr, fem_step(prev, curr, system, small_string.dt_s)
        np.testing.assert_allclose(curr, h.data[k], rtol=0, atol=1e-15)
    assert np.all(h.data[:, 0] == 0) and np.all(h.data[:, -1] == 0)


def test_streaming_blocks_equal_full_history(small_string):
    full = simulate_fem(small_string).data
    streamed = np.vstack([b.copy() for b in iter_fem_blocks(small_string, block_steps=50)])
    assert np.array_equal(streamed, full)


def test_zero_pluck_zero_history(small_string):
    assert not simulate_fem(small_string.replace(pluck_amplitude_m=0.0)).data.any()


def test_above_consistent_mass_limit_diverges():
    with pytest.raises(DivergenceError) as err:
        simulate_fem(SWEEP_REFERENCE.replace(dt_s=1.6e-5))
    assert err.value.solver == "fem"


def test_damping_is_ignored_with_warning(small_string, caplog):
    damped = small_string.replace(damping=0.01)
    with caplog.at_level("WARNING", logger="vibrosim.fem"):
        h = simulate_fem(damped)
    assert "ignored" in caplog.text
    assert np.array_equal(h.data, simulate_fem(small_string).data)
