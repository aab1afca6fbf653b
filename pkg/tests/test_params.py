import math
from dataclasses import FrozenInstanceError

import pytest
import sympy as sp
from hypothesis import given, strategies as st

from vibrosim.params import (ALUMINUM_BELL, NYLON_B3, SWEEP_REFERENCE, BellConfig, ConfigError,
                             DomainError, Material, StringConfig, bending_rigidity,
                             builtin_materials, fundamental_frequency, load_bell_config,
                             load_string_config, lookup_material, tension_from_mass, wave_speed)

positive = st.floats(min_value=1e-6, max_value=1e6, allow_nan=False, allow_infinity=False)


def test_wave_speed_nylon():
    assert wave_speed(60, 5.82e-4) == pytest.approx(321.08, abs=0.01)


def test_wave_speed_sweep_reference():
    oracle = float(sp.sqrt(sp.Rational("42.86") / sp.Rational("4.30e-4")))
    assert wave_speed(42.86, 4.30e-4) == pytest.approx(oracle, rel=1e-14)
    assert wave_speed(42.86, 4.30e-4) == pytest.approx(315.71, abs=0.05)


@given(positive)
def test_wave_speed_identity(x):
    assert wave_speed(x, x) == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("args", [(0, 1), (-1, 1), (1, 0), (1, -2), (math.nan, 1)])
def test_wave_speed_rejects_nonpositive(args):
    with pytest.raises(DomainError):
        wave_speed(*args)


def test_fundamental_frequency_values():
    assert fundamental_frequency(0.65, 60, 5.82e-4) == pytest.approx(246.98, abs=0.01)
    assert fundamental_frequency(0.655, 45.02, 4.30e-4) == pytest.approx(247.0, abs=0.1)
    assert fundamental_frequency(0.5, 1, 1) == 1.0


def test_fundamental_frequency_rejects_bad_length():
    with pytest.raises(DomainError):
        fundamental_frequency(0, 60, 5.82e-4)


def test_bending_rigidity():
    E, h, nu = sp.Rational(62_000_000_000), sp.Rational(8, 10_000), sp.Rational(3, 10)
    oracle = float(E * h**3 / (12 * (1 - nu**2)))
    assert bending_rigidity(6.2e10, 8.0e-4, 0.30) == pytest.approx(oracle, rel=1e-14)
    assert bending_rigidity(6.2e10, 8.0e-4, 0.30) == pytest.approx(2.907, abs=5e-4)
    assert bending_rigidity(12, 1, 0) == 1.0
    assert bending_rigidity(7.0, 0.3, 0.0) == pytest.approx(7.0 * 0.3**3 / 12)


def test_bending_rigidity_rejects_nu_at_least_one():
    with pytest.raises(DomainError):
        bending_rigidity(1.0, 1.0, 1.0)


def test_materials():
    al = lookup_material("Aluminum")
    assert al.density == 2700 and al.youngs_modulus == 62e9
    assert al.poisson_ratio_range == (0.24, 0.33)
    cu = lookup_material("copper")
    assert (cu.density, cu.youngs_modulus) == (8920, 128e9)
    assert cu.poisson_ratio == pytest.approx(0.33)
    assert {m.name for m in builtin_materials()} >= {"Aluminum", "Copper"}
    with pytest.raises(KeyError):
        lookup_material("Unobtainium")


def test_tension_from_mass():
    assert tension_from_mass(1.0) == pytest.approx(9.81, rel=1e-3)


def test_string_config_derived_values():
    cfg = SWEEP_REFERENCE
    assert cfg.dx_m == pytest.approx(0.655 / 79)
    assert cfg.duration_s == pytest.approx(1.0)
    assert cfg.courant_number == pytest.approx(cfg.wave_speed * cfg.dt_s / cfg.dx_m)
    assert NYLON_B3.fundamental_hz == pytest.approx(246.985, abs=1e-3)
    assert cfg.with_duration(0.5).step_count == 50_000
    with pytest.raises(FrozenInstanceError):
        cfg.tension_n = 1.0


@pytest.mark.parametrize("change", [
    {"pluck_position_m": 0.0}, {"pluck_position_m": 0.655}, {"node_count": 2},
    {"tension_n": -1.0}, {"dt_s": 0.0}, {"damping": -0.1}, {"pluck_amplitude_m": -1e-3},
])
def test_string_config_validation(change):
    with pytest.raises(ConfigError):
        SWEEP_REFERENCE.replace(**change)


def test_zero_amplitude_is_allowed():
    assert SWEEP_REFERENCE.replace(pluck_amplitude_m=0.0).pluck_amplitude_m == 0.0


def test_bell_config_validation():
    with pytest.raises(ConfigError):
        BellConfig(0.04, 0.005, 2700, 6.2e10, 0.3)  # h / R = 0.125
    with pytest.raises(ConfigError):
        BellConfig(0.04, 8e-4, 2700, 6.2e10, 0.5)
    bell = BellConfig.from_material("Aluminum", 0.04, 8e-4, damping_sigma=10.0, poisson_ratio=0.3)
    assert bell == ALUMINUM_BELL


def test_material_rejects_bad_range():
    with pytest.raises(ValueError):
        Material("x", 1.0, 1.0, (0.4, 0.3))


def test_load_string_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# nylon\npreset = nylon-b3\ntension_n = 61.5  # heavier\nduration_s = 0.25\n")
    cfg = load_string_config(path)
    assert cfg.tension_n == 61.5 and cfg.length_m == 0.65
    assert cfg.step_count == 25_000


def test_load_string_config_defaults_to_sweep_reference(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("node_count = 40\n")
    assert load_string_config(path) == SWEEP_REFERENCE.replace(node_count=40)


@pytest.mark.parametrize("text", ["bogus = 1\n", "tension_n = heavy\n", "node_count = 4.5\n",
                                  "preset = banjo\n", "tension_n 5\n"])
def test_load_string_config_errors(tmp_path, text):
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_string_config(path)


def test_load_bell_config(tmp_path):
    path = tmp_path / "bell.cfg"
    path.write_text("material = Copper\nradius_m = 0.05\n")
    cfg = load_bell_config(path)
    assert cfg.density == 8920 and cfg.radius_m == 0.05 and cfg.thickness_m == 8e-4


def test_missing_config_is_io_error(tmp_path):
    with pytest.raises(OSError):
        load_string_config(tmp_path / "absent.cfg")


def test_string_config_direct_construction():
    cfg = StringConfig(1.0, 1.0, 1.0, 0.5)
    assert cfg.node_count == 80 and cfg.damping == 0.0
