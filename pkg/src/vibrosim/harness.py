"""Parameter sweeps, stability search, timing and end-to-end rendering."""

from __future__ import annotations

import csv
import os
import platform
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from . import _backend
from .acoustics import (PressureTrace, normalize, onset_sample, radiate_blocks, to_audio,
                        write_wav)
from .bell import bell_modes, synthesize_bell, write_mode_table
from .fdm import DivergenceError, cfl_limit, iter_fdm_blocks
from .fem import consistent_mass_limit, iter_fem_blocks
from .params import (BellConfig, ConfigError, ListenerGeometry, StringConfig,
                     fundamental_frequency)
from .spectral import (DEFAULT_WINDOW, Peak, Spectrum, fft_magnitude, harmonic_peaks,
                       period_estimate, relative_error, zero_mean)

SOLVERS = ("fdm", "fem")
SWEPT_PARAMETERS = {"tension": "tension_n", "dt": "dt_s", "node_count": "node_count"}
STABILITY_ITERATIONS = 12
STABILITY_DURATION_S = 0.2


def _fmt(x: float | None) -> str:
    return "" if x is None else format(x, ".9g")


def iter_blocks(config: StringConfig, solver: str, backend: str | None = None,
                block_steps: int = 8192) -> Iterator[np.ndarray]:
    if solver == "fdm":
        return iter_fdm_blocks(config, block_steps, backend)
    if solver == "fem":
        return iter_fem_blocks(config, block_steps, backend)
    raise ConfigError(f"unknown solver {solver!r}; expected one of {SOLVERS}")


def default_listener(config: StringConfig) -> ListenerGeometry:
    """One metre above the middle node."""
    return ListenerGeometry(reference_index=(config.node_count - 1) // 2)


def radiate(config: StringConfig, solver: str, geometry: ListenerGeometry | None = None,
            backend: str | None = None) -> PressureTrace:
    geometry = geometry or default_listener(config)
    return radiate_blocks(iter_blocks(config, solver, backend), config.node_count,
                          config.dx_m, config.dt_s, geometry)


def steps_for_window(config: StringConfig, geometry: ListenerGeometry, window: int) -> int:
    """Time levels needed before the analysis window is fully populated."""
    return onset_sample(geometry, config.dt_s) + window + 4


@dataclass(frozen=True)
class Measurement:
    spectrum: Spectrum
    peaks: list[Peak | None]
    expected_f1: float

    @property
    def f1(self) -> float | None:
        return self.peaks[0].frequency_hz if self.peaks and self.peaks[0] else None


def measure_harmonics(config: StringConfig, solver: str, count: int = 5,
                      window: int = DEFAULT_WINDOW, peak_mode: str = "parabolic",
                      geometry: ListenerGeometry | None = None, backend: str | None = None,
                      truncate: bool = True) -> Measurement:
    """Simulate, radiate, normalise and locate the first ``count`` harmonics.

    The analysis window starts at the acoustic onset. With ``truncate`` the
    run stops once the window is filled, which leaves the window unchanged.
    """
    geometry = geometry or default_listener(config)
    if truncate:
        needed = steps_for_window(config, geometry, window)
        if needed < config.step_count:
            config = config.replace(step_count=needed)
    trace = radiate(config, solver, geometry, backend)
    signal = normalize(trace.samples)
    spec = fft_magnitude(signal, trace.sample_rate, window, onset_sample(geometry, config.dt_s))
    f1 = fundamental_frequency(config.length_m, config.tension_n, config.linear_density)
    return Measurement(spec, harmonic_peaks(spec, f1, count, peak_mode), f1)


# --- sweeps ----------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    base: StringConfig
    swept_parameter: str
    values: tuple
    harmonics_tracked: int = 5
    solver_set: tuple = SOLVERS
    window: int = DEFAULT_WINDOW
    peak_mode: str = "bin"
    geometry: ListenerGeometry | None = None

    def __post_init__(self):
        if self.swept_parameter not in SWEPT_PARAMETERS:
            raise ConfigError(f"swept_parameter must be one of {sorted(SWEPT_PARAMETERS)}")
        values = tuple(self.values)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "solver_set", tuple(self.solver_set))
        if not values:
            raise ConfigError("sweep values must be nonempty")
        d = np.diff(np.asarray(values, dtype=float))
        if d.size and not (np.all(d > 0) or np.all(d < 0)):
            raise ConfigError("sweep values must be strictly monotone")
        if not self.solver_set or set(self.solver_set) - set(SOLVERS):
            raise ConfigError(f"solver_set must be a nonempty subset of {SOLVERS}")
        if self.harmonics_tracked < 1:
            raise ConfigError("harmonics_tracked must be >= 1")
        for v in values:
            self.config_at(v)  # validates every point up front

    def config_at(self, value) -> StringConfig:
        name = SWEPT_PARAMETERS[self.swept_parameter]
        if name == "node_count":
            if int(value) != value:
                raise ConfigError("node_count values must be integers")
            value = int(value)
        return self.base.replace(**{name: value})


@dataclass(frozen=True)
class SweepRow:
    value: float
    solver: str
    harmonic: int
    expected_hz: float
    measured_hz: float | None
    relative_error: float
    wall_time_s: float
    diverged: bool


CSV_COLUMNS = ("parameter", "value", "solver", "harmonic", "expected_hz", "measured_hz",
               "relative_error", "diverged", "wall_time_s")


@dataclass
class SweepReport:
    parameter: str
    rows: list[SweepRow] = field(default_factory=list)

    def series(self, solver: str, harmonic: int = 1) -> tuple[np.ndarray, np.ndarray]:
        sel = [r for r in self.rows if r.solver == solver and r.harmonic == harmonic]
        return (np.array([r.value for r in sel], dtype=float),
                np.array([r.relative_error for r in sel]))

    def error_period(self, solver: str, harmonic: int = 1) -> float | None:
        x, y = self.series(solver, harmonic)
        return period_estimate(x, zero_mean(y))

    def to_csv(self, path: str | Path, include_timing: bool = True) -> Path:
        path = Path(path)
        cols = CSV_COLUMNS if include_timing else CSV_COLUMNS[:-1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for r in self.rows:
                row = [self.parameter, _fmt(r.value), r.solver, r.harmonic, _fmt(r.expected_hz),
                       _fmt(r.measured_hz), _fmt(r.relative_error), int(r.diverged)]
                if include_timing:
                    row.append(_fmt(r.wall_time_s))
                w.writerow(row)
        return path


def _sweep_point(spec: SweepSpec, value, solver: str, backend: str | None) -> list[SweepRow]:
    config = spec.config_at(value)
    f1 = fundamental_frequency(config.length_m, config.tension_n, config.linear_density)
    n_h = spec.harmonics_tracked
    start = time.perf_counter()
    try:
        m = measure_harmonics(config, solver, n_h, spec.window, spec.peak_mode,
                              spec.geometry, backend)
        peaks, diverged = m.peaks, False
    except DivergenceError:
        peaks, diverged = [None] * n_h, True
    wall = time.perf_counter() - start
    rows = []
    for n, peak in enumerate(peaks, start=1):
        expected = n * f1
        measured = None if peak is None else peak.frequency_hz
        err = 1.0 if diverged else min(1.0, relative_error(measured, expected))
        rows.append(SweepRow(float(value), solver, n, expected, measured, err, wall, diverged))
    return rows


def run_sweep(spec: SweepSpec, workers: int | None = None,
              backend: str | None = None) -> SweepReport:
    """Evaluate every (value, solver) point; rows come back in input order."""
    tasks = [(v, s) for v in spec.values for s in spec.solver_set]
    workers = workers or min(len(tasks), os.cpu_count() or 1, 8)
    if workers <= 1:
        results = [_sweep_point(spec, v, s, backend) for v, s in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda t: _sweep_point(spec, t[0], t[1], backend), tasks))
    report = SweepReport(spec.swept_parameter)
    for rows in results:
        report.rows.extend(rows)
    return report


def tension_values(start: float = 42.0, step: float = 0.5, count: int = 40) -> tuple:
    return tuple(round(start + i * step, 10) for i in range(count))


def dt_values(config: StringConfig, count: int = 40, low_fraction: float = 0.1,
              high_fraction: float = 0.99) -> tuple:
    """Log-spaced time steps inside the range where both solvers are stable."""
    limit = consistent_mass_limit(config.wave_speed, config.dx_m)
    return tuple(np.geomspace(low_fraction * limit, high_fraction * limit, count).tolist())


def node_values(start: int = 10, stop: int = 120, step: int = 10) -> tuple:
    return tuple(range(start, stop + 1, step))


# --- stability ---------------------------------------------------------------

class BracketError(ValueError):
    pass


def runs_stably(config: StringConfig, solver: str, dt: float,
                duration: float = STABILITY_DURATION_S, backend: str | None = None) -> bool:
    trial = config.replace(dt_s=dt, step_count=max(3, int(round(duration / dt))))
    try:
        for _ in iter_blocks(trial, solver, backend):
            pass
    except DivergenceError:
        return False
    return True


def stability_search(config: StringConfig, solver: str, bracket: tuple[float, float],
                     iterations: int = STABILITY_ITERATIONS,
                     duration: float = STABILITY_DURATION_S,
                     backend: str | None = None) -> float:
    """Largest time step found stable by bisection on a divergence check."""
    lo, hi = sorted(bracket)
    if not lo > 0:
        raise BracketError("bracket must be positive")
    if not runs_stably(config, solver, lo, duration, backend):
        raise BracketError(f"{solver}: lower bracket {lo:.4g} s already diverges")
    if runs_stably(config, solver, hi, duration, backend):
        raise BracketError(f"{solver}: upper bracket {hi:.4g} s is still stable")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if runs_stably(config, solver, mid, duration, backend):
            lo = mid
        else:
            hi = mid
    return lo


def theoretical_limit(config: StringConfig, solver: str) -> float:
    if solver == "fdm":
        return cfl_limit(config.wave_speed, config.dx_m)
    if solver == "fem":
        return consistent_mass_limit(config.wave_speed, config.dx_m)
    raise ConfigError(f"unknown solver {solver!r}")


# --- timing ------------------------------------------------------------------

@dataclass(frozen=True)
class TimingRow:
    value: float
    solver: str
    median_s: float
    samples_s: tuple


@dataclass
class TimingTable:
    parameter: str
    rows: list[TimingRow]
    environment: dict

    def series(self, solver: str) -> tuple[np.ndarray, np.ndarray]:
        sel = [r for r in self.rows if r.solver == solver]
        return np.array([r.value for r in sel], float), np.array([r.median_s for r in sel])

    def slope(self, solver: str):
        """Least-squares slope of median time against the parameter (scipy ``linregress``)."""
        from scipy.stats import linregress

        return linregress(*self.series(solver))

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            for k, v in self.environment.items():
                w.writerow([f"# {k}", v])
            w.writerow(["parameter", "value", "solver", "median_s", "repeats"])
            for r in self.rows:
                w.writerow([self.parameter, _fmt(r.value), r.solver, _fmt(r.median_s),
                            len(r.samples_s)])
        return path


def environment_metadata(backend: str | None = None) -> dict:
    kernels = _backend.get_kernels(backend)
    name = "cython" if kernels.__name__.endswith("_ckernels") else "python"
    return {
        "host": platform.node() or "unknown",
        "machine": platform.machine(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "backend": name,
        "build_profile": "cython -O3" if name == "cython" else "numpy fallback",
    }


def timing_benchmark(spec: SweepSpec, repeats: int = 3, backend: str | None = None,
                     clock: Callable[[], float] = time.perf_counter) -> TimingTable:
    """Median wall time of the bare solver run per (value, solver)."""
    if repeats < 3:
        raise ConfigError("repeats must be >= 3")
    rows = []
    for value in spec.values:
        config = spec.config_at(value)
        for solver in spec.solver_set:
            samples = []
            for _ in range(repeats):
                start = clock()
                try:
                    for _ in iter_blocks(config, solver, backend):
                        pass
                except DivergenceError:
                    pass
                samples.append(clock() - start)
            rows.append(TimingRow(float(value), solver, statistics.median(samples),
                                  tuple(samples)))
    return TimingTable(spec.swept_parameter, rows, environment_metadata(backend))


# --- rendering -----------------------------------------------------------------

@dataclass(frozen=True)
class RenderResult:
    wav_path: Path
    csv_path: Path
    sample_rate: int
    measurement: Measurement | None = None


def render_string(config: StringConfig, solver: str, out_path: str | Path,
                  geometry: ListenerGeometry | None = None, window: int = DEFAULT_WINDOW,
                  harmonics: int = 5, decimate_to_cd: bool = False,
                  backend: str | None = None) -> RenderResult:
    """Full run to a 16-bit WAV plus a one-row metadata CSV next to it."""
    geometry = geometry or default_listener(config)
    out_path = Path(out_path)
    trace = radiate(config, solver, geometry, backend)
    signal = normalize(trace.samples)
    spec = fft_magnitude(signal, trace.sample_rate, window, onset_sample(geometry, config.dt_s))
    f1 = config.fundamental_hz
    peaks = harmonic_peaks(spec, f1, harmonics)
    audio = to_audio(trace, trace.sample_rate, decimate_to_cd)
    write_wav(audio, out_path)
    csv_path = out_path.with_suffix(".csv")
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["solver", "sample_rate_hz", "expected_f1_hz"]
                   + [f"h{n}_hz" for n in range(1, harmonics + 1)])
        w.writerow([solver, audio.sample_rate, _fmt(f1)]
                   + [_fmt(p.frequency_hz if p else None) for p in peaks])
    return RenderResult(out_path, csv_path, audio.sample_rate, Measurement(spec, peaks, f1))


def render_bell(config: BellConfig, k_set: Sequence[int], duration: float, sample_rate: int,
                out_path: str | Path, amplitudes: Sequence[float] | None = None) -> RenderResult:
    """Additive modal synthesis to WAV plus a CSV of the mode frequencies."""
    out_path = Path(out_path)
    modes = bell_modes(config, list(k_set))
    amplitudes = [1.0] * len(modes) if amplitudes is None else list(amplitudes)
    if len(amplitudes) != len(modes):
        raise ConfigError("one amplitude per mode is required")
    signal = synthesize_bell(list(zip(modes, amplitudes)), duration, sample_rate)
    audio = to_audio(signal, sample_rate)
    write_wav(audio, out_path)
    csv_path = out_path.with_suffix(".csv")
    write_mode_table(modes, csv_path)
    return RenderResult(out_path, csv_path, audio.sample_rate)


def bisection_resolution(bracket: tuple[float, float], iterations: int = STABILITY_ITERATIONS) -> float:
    return abs(bracket[1] - bracket[0]) / 2**iterations

