"""Physical parameter types and derived quantities shared by every solver.

All quantities are SI. Types are frozen dataclasses and validate their
invariants on construction.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

GRAVITY = 9.81


class DomainError(ValueError):
    """A physical quantity is outside the domain of a formula."""


class ConfigError(ValueError):
    """A run configuration is malformed or violates an invariant."""


def _require_positive(name: str, value: float) -> None:
    if not (value > 0 and math.isfinite(value)):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class StringConfig:
    """Physical and discretisation parameters for one string run.

    ``node_count`` includes both fixed ends, so the grid spacing is
    ``length_m / (node_count - 1)``.
    """

    length_m: float
    tension_n: float
    linear_density: float
    pluck_position_m: float
    pluck_amplitude_m: float = 3.0e-4
    damping: float = 0.0
    node_count: int = 80
    dt_s: float = 1.0e-5
    step_count: int = 100_000

    def __post_init__(self):
        for name in ("length_m", "tension_n", "linear_density", "dt_s"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ConfigError(f"{name} must be positive, got {value!r}")
        if not self.damping >= 0:
            raise ConfigError(f"damping must be nonnegative, got {self.damping!r}")
        if not self.pluck_amplitude_m >= 0:
            raise ConfigError("pluck_amplitude_m must be nonnegative")
        if not 0 < self.pluck_position_m < self.length_m:
            raise ConfigError(
                f"pluck_position_m must lie in (0, {self.length_m}), "
                f"got {self.pluck_position_m!r}"
            )
        if int(self.node_count) != self.node_count or self.node_count < 3:
            raise ConfigError(f"node_count must be an integer >= 3, got {self.node_count!r}")
        if int(self.step_count) != self.step_count or self.step_count < 2:
            raise ConfigError(f"step_count must be an integer >= 2, got {self.step_count!r}")
        object.__setattr__(self, "node_count", int(self.node_count))
        object.__setattr__(self, "step_count", int(self.step_count))

    @property
    def dx_m(self) -> float:
        return self.length_m / (self.node_count - 1)

    @property
    def duration_s(self) -> float:
        return self.step_count * self.dt_s

    @property
    def wave_speed(self) -> float:
        return wave_speed(self.tension_n, self.linear_density)

    @property
    def fundamental_hz(self) -> float:
        return fundamental_frequency(self.length_m, self.tension_n, self.linear_density)

    @property
    def courant_number(self) -> float:
        """c * dt / dx; the undamped leapfrog is stable for values <= 1."""
        return self.wave_speed * self.dt_s / self.dx_m

    def with_duration(self, seconds: float) -> "StringConfig":
        return replace(self, step_count=max(2, int(round(seconds / self.dt_s))))

    def replace(self, **changes) -> "StringConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class BellConfig:
    """Thin hemispherical shell: geometry, material and fluid damping."""

    radius_m: float
    thickness_m: float
    density: float
    youngs_modulus: float
    poisson_ratio: float
    damping_sigma: float = 0.0

    def __post_init__(self):
        for name in ("radius_m", "thickness_m", "density", "youngs_modulus"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ConfigError(f"{name} must be positive, got {value!r}")
        if not 0 <= self.poisson_ratio < 0.5:
            raise ConfigError(f"poisson_ratio must be in [0, 0.5), got {self.poisson_ratio!r}")
        if not self.damping_sigma >= 0:
            raise ConfigError("damping_sigma must be nonnegative")
        if self.thickness_m / self.radius_m >= 0.1:
            raise ConfigError("thin-shell model needs thickness_m / radius_m < 0.1")

    @property
    def bending_rigidity(self) -> float:
        return bending_rigidity(self.youngs_modulus, self.thickness_m, self.poisson_ratio)

    @classmethod
    def from_material(cls, material: "Material | str", radius_m: float,
                      thickness_m: float, damping_sigma: float = 0.0,
                      poisson_ratio: float | None = None) -> "BellConfig":
        if isinstance(material, str):
            material = lookup_material(material)
        nu = material.poisson_ratio if poisson_ratio is None else poisson_ratio
        return cls(radius_m, thickness_m, material.density, material.youngs_modulus,
                   nu, damping_sigma)


@dataclass(frozen=True)
class Material:
    name: str
    density: float
    youngs_modulus: float
    poisson_ratio_range: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.poisson_ratio_range
        if self.density <= 0 or self.youngs_modulus <= 0 or lo > hi:
            raise ValueError(f"invalid material row {self!r}")

    @property
    def poisson_ratio(self) -> float:
        """Midpoint of the tabulated range."""
        lo, hi = self.poisson_ratio_range
        return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ListenerGeometry:
    """Listener placed ``standoff_m`` above grid node ``reference_index``."""

    standoff_m: float = 1.0
    reference_index: int = 0
    air_density: float = 1.2
    sound_speed: float = 343.0

    def __post_init__(self):
        for name in ("standoff_m", "air_density", "sound_speed"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.reference_index < 0:
            raise ConfigError("reference_index must be a valid node index")


def wave_speed(tension: float, linear_density: float) -> float:
    """Transverse wave speed ``sqrt(T / mu)`` in m/s."""
    _require_positive("tension", tension)
    _require_positive("linear_density", linear_density)
    return math.sqrt(tension / linear_density)


def fundamental_frequency(length: float, tension: float, linear_density: float) -> float:
    """Fundamental of an ideal string fixed at both ends, in Hz.

    Harmonic ``n`` sits at ``n`` times this value.
    """
    _require_positive("length", length)
    return wave_speed(tension, linear_density) / (2.0 * length)


def bending_rigidity(youngs_modulus: float, thickness: float, poisson_ratio: float) -> float:
    """Plate bending rigidity ``E h^3 / (12 (1 - nu^2))`` in N*m."""
    _require_positive("youngs_modulus", youngs_modulus)
    _require_positive("thickness", thickness)
    if not 0 <= poisson_ratio < 1:
        raise DomainError(f"poisson_ratio must be in [0, 1), got {poisson_ratio!r}")
    return youngs_modulus * thickness**3 / (12.0 * (1.0 - poisson_ratio**2))


def tension_from_mass(mass_kg: float) -> float:
    """Tension of a string loaded by a hanging mass over a pulley."""
    return mass_kg * GRAVITY


_MATERIALS = (
    Material("Steel", 7850.0, 210e9, (0.24, 0.30)),
    Material("Aluminum", 2700.0, 62e9, (0.24, 0.33)),
    Material("Copper", 8920.0, 128e9, (0.33, 0.33)),
    # Young's modulus tabulated as 80-100 GPa; midpoint stored.
    Material("Brass", 8470.0, 90e9, (0.37, 0.37)),
)


def builtin_materials() -> list[Material]:
    return list(_MATERIALS)


def lookup_material(name: str) -> Material:
    for material in _MATERIALS:
        if material.name.lower() == name.lower():
            return material
    raise KeyError(f"unknown material {name!r}; known: {[m.name for m in _MATERIALS]}")


# Named presets. The two nylon B3 strings use different linear densities in
# the source data; both are kept rather than reconciled.
NYLON_B3 = StringConfig(
    length_m=0.65, tension_n=60.0, linear_density=5.82e-4,
    pluck_position_m=0.18, pluck_amplitude_m=3.0e-4,
    node_count=81, dt_s=1.0e-5, step_count=100_000,
)

SWEEP_REFERENCE = StringConfig(
    length_m=0.655, tension_n=42.86, linear_density=4.30e-4,
    pluck_position_m=0.18, pluck_amplitude_m=3.0e-4,
    node_count=80, dt_s=1.0e-5, step_count=100_000,
)

TENSION_SWEEP_BASE = SWEEP_REFERENCE.replace(pluck_position_m=0.3275)

REAL_GUITAR_B3 = StringConfig(
    length_m=0.655, tension_n=45.02, linear_density=4.30e-4,
    pluck_position_m=0.18, pluck_amplitude_m=3.0e-4, damping=0.0013,
    node_count=80, dt_s=9.65e-6, step_count=int(round(3.0 / 9.65e-6)),
)

ALUMINUM_BELL = BellConfig(
    radius_m=0.04, thickness_m=8.0e-4, density=2700.0,
    youngs_modulus=6.2e10, poisson_ratio=0.30, damping_sigma=10.0,
)

STRING_PRESETS = {
    "nylon-b3": NYLON_B3,
    "sweep-reference": SWEEP_REFERENCE,
    "tension-sweep": TENSION_SWEEP_BASE,
    "real-guitar-b3": REAL_GUITAR_B3,
}


_STRING_KEYS = {f.name: f.type for f in fields(StringConfig)}
_BELL_KEYS = {f.name: f.type for f in fields(BellConfig)}


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse a flat ``key = value`` file with ``#`` comments."""
    parser = configparser.ConfigParser(
        inline_comment_prefixes=("#",), comment_prefixes=("#",),
        delimiters=("=",), interpolation=None,
    )
    text = Path(path).read_text()
    try:
        parser.read_string("[run]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return dict(parser["run"])


def _coerce(key: str, raw: str, kind) -> float | int:
    try:
        if kind in ("int", int):
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as a number") from None


def string_config_from_mapping(values: dict[str, str],
                               base: StringConfig | None = None) -> StringConfig:
    """Build a StringConfig from string values; unknown keys are rejected.

    ``duration_s`` is accepted as a convenience and converted to a step count.
    """
    values = dict(values)
    preset = values.pop("preset", None)
    if preset is not None:
        if preset not in STRING_PRESETS:
            raise ConfigError(f"unknown preset {preset!r}")
        base = STRING_PRESETS[preset]
    duration = values.pop("duration_s", None)
    unknown = set(values) - set(_STRING_KEYS)
    if unknown:
        raise ConfigError(f"unknown string config keys: {sorted(unknown)}")
    parsed = {k: _coerce(k, v, _STRING_KEYS[k]) for k, v in values.items()}
    try:
        if base is not None:
            config = replace(base, **parsed)
        else:
            config = StringConfig(**parsed)
        if duration is not None:
            config = config.with_duration(_coerce("duration_s", duration, float))
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return config


def bell_config_from_mapping(values: dict[str, str]) -> BellConfig:
    values = dict(values)
    material = values.pop("material", None)
    unknown = set(values) - set(_BELL_KEYS)
    if unknown:
        raise ConfigError(f"unknown bell config keys: {sorted(unknown)}")
    parsed = {k: _coerce(k, v, _BELL_KEYS[k]) for k, v in values.items()}
    if material is not None:
        try:
            m = lookup_material(material)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
        parsed.setdefault("density", m.density)
        parsed.setdefault("youngs_modulus", m.youngs_modulus)
        parsed.setdefault("poisson_ratio", m.poisson_ratio)
    base = {f.name: getattr(ALUMINUM_BELL, f.name) for f in fields(BellConfig)}
    base.update(parsed)
    return BellConfig(**base)


def load_string_config(path: str | Path) -> StringConfig:
    return string_config_from_mapping(read_config_file(path), base=SWEEP_REFERENCE)


def load_bell_config(path: str | Path) -> BellConfig:
    return bell_config_from_mapping(read_config_file(path))
