import numpy as np
import pytest

from vibrosim import cli
from vibrosim.acoustics import AudioBuffer, read_wav, write_wav


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_help_and_bad_args(capsys):
    assert run(capsys, "--help")[0] == 0
    assert run(capsys, "sweep", "--solver", "spectral")[0] == cli.EXIT_CONFIG
    assert run(capsys)[0] == cli.EXIT_CONFIG


def test_simulate_string(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("preset = nylon-b3\nduration_s = 0.08\n")
    code, out, _ = run(capsys, "simulate-string", "--config", cfg, "--solver", "fem",
                       "--out", tmp_path, "--seedless")
    assert code == 0 and "measured" in out
    assert read_wav(tmp_path / "string_fem.wav").sample_rate == 100_000
    assert (tmp_path / "string_fem.csv").exists()


def test_simulate_string_csv_only(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("preset = nylon-b3\nduration_s = 0.06\n")
    assert run(capsys, "simulate-string", "--config", cfg, "--out", tmp_path, "--csv")[0] == 0
    assert (tmp_path / "string_fdm.csv").exists()
    assert not (tmp_path / "string_fdm.wav").exists()


def test_divergence_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("dt_s = 3e-5\nduration_s = 0.2\n")
    code, _, err = run(capsys, "simulate-string", "--config", cfg, "--out", tmp_path)
    assert code == cli.EXIT_DIVERGED and "diverged" in err


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("tension_n = -4\n")
    assert run(capsys, "simulate-string", "--config", cfg, "--out", tmp_path)[0] == cli.EXIT_CONFIG
    assert run(capsys, "simulate-string", "--config", tmp_path / "nope.cfg")[0] == cli.EXIT_IO


def test_simulate_bell(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate-bell", "--out", tmp_path, "--duration", "0.2")
    assert code == 0 and "692.379" in out
    assert read_wav(tmp_path / "bell.wav").samples.size == 8820
    code, _, err = run(capsys, "simulate-bell", "--out", tmp_path, "--k", "5", "--rate", "6000")
    assert code == cli.EXIT_CONFIG and "aliases" in err


def test_sweep(tmp_path, capsys):
    code, out, _ = run(capsys, "sweep", "--param", "tension", "--values", "42", "43",
                       "--harmonics", "2", "--out", tmp_path, "--solver", "fem")
    assert code == 0
    lines = (tmp_path / "sweep_tension.csv").read_text().splitlines()
    assert len(lines) == 1 + 2 * 2


def test_stability(tmp_path, capsys):
    code, out, _ = run(capsys, "stability", "--solver", "fem", "--csv", "--out", tmp_path)
    assert code == 0 and "ratio 1.00" in out
    assert (tmp_path / "stability.csv").read_text().startswith("solver,dt_stable_s")
    code, _, err = run(capsys, "stability", "--solver", "fdm", "--bracket", "1e-6", "2e-6")
    assert code == cli.EXIT_CONFIG and "bracket" in err


def test_bench(tmp_path, capsys):
    cfg = tmp_path / "b.cfg"
    cfg.write_text("step_count = 200\n")
    code, out, _ = run(capsys, "bench", "--config", cfg, "--values", "20", "30",
                       "--csv", "--out", tmp_path)
    assert code == 0 and out.count("ms") == 4
    assert (tmp_path / "bench_node_count.csv").exists()


def test_spectrum(tmp_path, capsys):
    t = np.arange(8192) / 44100
    samples = np.floor(0.5 * np.sin(2 * np.pi * 441 * t) * 32767).astype(np.int16)
    wav = write_wav(AudioBuffer(samples, 44100), tmp_path / "tone.wav")
    code, out, _ = run(capsys, "spectrum", wav, "--f1", "441", "--harmonics", "2", "--csv",
                       "--out", tmp_path)
    assert code == 0 and "dominant peak 441" in out and "h2: absent" in out
    assert (tmp_path / "tone_spectrum.csv").exists()
    code, _, _ = run(capsys, "spectrum", tmp_path / "missing.wav")
    assert code == cli.EXIT_IO
    code, _, _ = run(capsys, "spectrum", wav, "--window", "100000")
    assert code == cli.EXIT_CONFIG
