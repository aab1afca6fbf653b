"""Command-line entry point: ``vibrosim <subcommand> [options]``.

Exit status: 0 success, 2 configuration error, 3 divergence, 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness
from .acoustics import SilentSignalError, read_wav
from .bell import OverdampedModeError
from .fdm import DivergenceError
from .params import (ALUMINUM_BELL, STRING_PRESETS, SWEEP_REFERENCE, TENSION_SWEEP_BASE,
                     ConfigError, DomainError, load_bell_config, load_string_config)
from .spectral import DEFAULT_WINDOW, dominant_peak, fft_magnitude, harmonic_peaks

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_IO = 4

log = logging.getLogger("vibrosim")


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="key = value configuration file")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument("--seedless", action="store_true",
                        help="accepted for compatibility; nothing here is random")
    parser.add_argument("--window", type=int, default=DEFAULT_WINDOW, help="FFT window length")
    parser.add_argument("--csv", action="store_true", help="write CSV output")
    parser.add_argument("--wav", action="store_true", help="write WAV output")
    parser.add_argument("--backend", choices=("cython", "python"), default=None)


def _solver_arg(parser, allow_both=False):
    choices = ("fdm", "fem", "both") if allow_both else ("fdm", "fem")
    parser.add_argument("--solver", choices=choices, default="both" if allow_both else "fdm")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vibrosim", description="String and bell vibration simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate-string", help="simulate a plucked string to WAV/CSV")
    _common(s)
    _solver_arg(s)
    s.add_argument("--preset", choices=sorted(STRING_PRESETS), default=None)
    s.add_argument("--decimate", action="store_true", help="average down towards 44.1 kHz")

    b = sub.add_parser("simulate-bell", help="modal synthesis of a hemispherical bell")
    _common(b)
    b.add_argument("--k", type=int, nargs="+", default=[2, 3, 4, 5])
    b.add_argument("--duration", type=float, default=2.0)
    b.add_argument("--rate", type=int, default=44100)

    w = sub.add_parser("sweep", help="frequency error against tension, dt or node count")
    _common(w)
    _solver_arg(w, allow_both=True)
    w.add_argument("--param", choices=sorted(harness.SWEPT_PARAMETERS), default="tension")
    w.add_argument("--values", type=float, nargs="+", help="explicit sweep values")
    w.add_argument("--harmonics", type=int, default=5)
    w.add_argument("--peak-mode", choices=("bin", "parabolic"), default="bin")
    w.add_argument("--workers", type=int, default=None)

    t = sub.add_parser("stability", help="bisect the largest stable time step")
    _common(t)
    _solver_arg(t, allow_both=True)
    t.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"),
                   help="time-step bracket in seconds (default 0.8x..1.2x the theoretical limit)")

    n = sub.add_parser("bench", help="median wall time per sweep point")
    _common(n)
    _solver_arg(n, allow_both=True)
    n.add_argument("--param", choices=sorted(harness.SWEPT_PARAMETERS), default="node_count")
    n.add_argument("--values", type=float, nargs="+")
    n.add_argument("--repeats", type=int, default=3)

    f = sub.add_parser("spectrum", help="magnitude spectrum of a WAV file")
    _common(f)
    f.add_argument("input", type=Path, help="mono 16-bit WAV file")
    f.add_argument("--offset", type=int, default=0, help="first sample of the window")
    f.add_argument("--f1", type=float, default=None, help="expected fundamental for harmonic search")
    f.add_argument("--harmonics", type=int, default=5)
    return p


def _string_config(args, default):
    if args.config is not None:
        return load_string_config(args.config)
    if getattr(args, "preset", None):
        return STRING_PRESETS[args.preset]
    return default


def _solvers(choice: str) -> tuple[str, ...]:
    return harness.SOLVERS if choice == "both" else (choice,)


def _outputs(args) -> tuple[bool, bool]:
    """(write_csv, write_wav); neither flag means both."""
    if not args.csv and not args.wav:
        return True, True
    return args.csv, args.wav


def _prepare_out(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_simulate_string(args) -> int:
    config = _string_config(args, STRING_PRESETS["nylon-b3"])
    out = _prepare_out(args.out)
    wav = out / f"string_{args.solver}.wav"
    result = harness.render_string(config, args.solver, wav, window=args.window,
                                   decimate_to_cd=args.decimate, backend=args.backend)
    want_csv, want_wav = _outputs(args)
    if not want_wav:
        result.wav_path.unlink()
    if not want_csv:
        result.csv_path.unlink()
    m = result.measurement
    f1 = m.f1
    print(f"{args.solver}: expected f1 {m.expected_f1:.2f} Hz, measured "
          f"{'n/a' if f1 is None else f'{f1:.2f} Hz'} at {result.sample_rate} Hz sampling")
    return EXIT_OK


def cmd_simulate_bell(args) -> int:
    config = load_bell_config(args.config) if args.config else ALUMINUM_BELL
    out = _prepare_out(args.out)
    result = harness.render_bell(config, args.k, args.duration, args.rate, out / "bell.wav")
    want_csv, want_wav = _outputs(args)
    if not want_wav:
        result.wav_path.unlink()
    if not want_csv:
        result.csv_path.unlink()
    print(Path(result.csv_path).read_text() if want_csv else f"wrote {result.wav_path}", end="")
    return EXIT_OK


def _sweep_spec(args) -> harness.SweepSpec:
    if args.param == "tension":
        base = _string_config(args, TENSION_SWEEP_BASE)
        values = args.values or harness.tension_values()
    elif args.param == "dt":
        base = _string_config(args, SWEEP_REFERENCE)
        values = args.values or harness.dt_values(base)
    else:
        base = _string_config(args, SWEEP_REFERENCE)
        values = args.values or harness.node_values()
    return harness.SweepSpec(base, args.param, tuple(values),
                             harmonics_tracked=getattr(args, "harmonics", 1),
                             solver_set=_solvers(args.solver), window=args.window,
                             peak_mode=getattr(args, "peak_mode", "bin"))


def cmd_sweep(args) -> int:
    spec = _sweep_spec(args)
    report = harness.run_sweep(spec, workers=args.workers, backend=args.backend)
    path = report.to_csv(_prepare_out(args.out) / f"sweep_{args.param}.csv")
    print(f"wrote {len(report.rows)} rows to {path}")
    if len(spec.values) >= 8:
        for solver in spec.solver_set:
            periods = []
            for n in range(1, spec.harmonics_tracked + 1):
                period = report.error_period(solver, n)
                periods.append("none" if period is None else f"{period:.4g}")
            print(f"{solver}: error period per harmonic: {', '.join(periods)}")
    return EXIT_OK


def cmd_stability(args) -> int:
    config = _string_config(args, SWEEP_REFERENCE)
    rows = []
    for solver in _solvers(args.solver):
        theory = harness.theoretical_limit(config, solver)
        bracket = tuple(args.bracket) if args.bracket else (0.8 * theory, 1.2 * theory)
        found = harness.stability_search(config, solver, bracket, backend=args.backend)
        rows.append((solver, found, theory))
        print(f"{solver}: largest stable dt {found:.6g} s (theoretical {theory:.6g} s, "
              f"ratio {found / theory:.4f})")
    if args.csv:
        path = _prepare_out(args.out) / "stability.csv"
        path.write_text("solver,dt_stable_s,dt_theory_s\n"
                        + "".join(f"{s},{a:.9g},{b:.9g}\n" for s, a, b in rows))
    return EXIT_OK


def cmd_bench(args) -> int:
    spec = _sweep_spec(args)
    table = harness.timing_benchmark(spec, args.repeats, backend=args.backend)
    for r in table.rows:
        print(f"{table.parameter}={r.value:g} {r.solver}: {r.median_s * 1e3:.2f} ms")
    if args.csv:
        table.to_csv(_prepare_out(args.out) / f"bench_{args.param}.csv")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    audio = read_wav(args.input)
    samples = audio.samples.astype(float)
    spec = fft_magnitude(samples, audio.sample_rate, args.window, args.offset)
    peak = dominant_peak(spec)
    print(f"dominant peak {peak.frequency_hz:.2f} Hz (bin width {spec.bin_hz:.3f} Hz)")
    if args.f1:
        for n, p in enumerate(harmonic_peaks(spec, args.f1, args.harmonics), start=1):
            print(f"  h{n}: {'absent' if p is None else f'{p.frequency_hz:.2f} Hz'}")
    if args.csv:
        spec.to_csv(_prepare_out(args.out) / (args.input.stem + "_spectrum.csv"))
    return EXIT_OK


COMMANDS = {
    "simulate-string": cmd_simulate_string,
    "simulate-bell": cmd_simulate_bell,
    "sweep": cmd_sweep,
    "stability": cmd_stability,
    "bench": cmd_bench,
    "spectrum": cmd_spectrum,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    np.seterr(over="ignore", invalid="ignore")
    try:
        return COMMANDS[args.command](args)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ConfigError, DomainError, OverdampedModeError, SilentSignalError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
