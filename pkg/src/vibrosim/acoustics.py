"""Radiated pressure, normalisation, 16-bit quantisation and WAV output."""

from __future__ import annotations

import logging
import math
import struct
import wave
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .fdm import WaveHistory
from .params import ListenerGeometry

log = logging.getLogger(__name__)

PCM16_MAX = 32767
PCM16_MIN = -32768
CD_RATE = 44100


class SilentSignalError(ValueError):
    """Normalisation of an all-zero signal was requested."""


class WavIOError(OSError):
    pass


@dataclass(frozen=True)
class PressureTrace:
    samples: np.ndarray  # Pa
    dt_s: float

    @property
    def sample_rate(self) -> float:
        return 1.0 / self.dt_s


@dataclass(frozen=True)
class AudioBuffer:
    samples: np.ndarray  # int16
    sample_rate: int

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.size and (s.min() < PCM16_MIN or s.max() > PCM16_MAX):
            raise ValueError("samples exceed the 16-bit range")


def listener_distances(node_count: int, dx: float, geometry: ListenerGeometry) -> np.ndarray:
    """Distance from each node to a listener ``standoff`` above the reference node."""
    if geometry.reference_index >= node_count:
        raise ValueError(f"reference_index {geometry.reference_index} outside grid of {node_count}")
    x = np.arange(node_count) * dx
    return np.hypot(geometry.standoff_m, x - x[geometry.reference_index])


class RetardedRadiator:
    """Accumulate ``sum_n rho0 c0 / (4 pi R_n) * du_n/dt (t - R_n / c0)``.

    Rows of displacement are fed in time order, in blocks of any size, so
    long runs never need their full history in memory. Velocity is a central
    difference in time (one-sided at the first and last sample) and each
    node's delayed velocity is linearly interpolated between samples.
    Before ``t = 0`` the string is at rest.
    """

    def __init__(self, node_count: int, dx: float, dt: float, geometry: ListenerGeometry):
        self.dt = dt
        R = listener_distances(node_count, dx, geometry)
        self.weights = geometry.air_density * geometry.sound_speed / (4.0 * math.pi * R)
        delays = R / (geometry.sound_speed * dt)
        if delays.min() < 1.0:
            log.info("time step %.3g s is coarser than the shortest propagation delay; "
                     "delays below one sample are interpolated from sample 0", dt)
        self.delay_int = np.floor(delays).astype(np.int64)
        self.delay_frac = delays - self.delay_int
        self._tail = np.empty((0, node_count))  # last <= 2 displacement rows
        self._rows_seen = 0
        self._vel = np.empty((0, node_count))
        self._vel_start = 0  # global index of _vel[0]
        self._pressure: list[np.ndarray] = []
        self._p_next = 0
        self._finished = False

    def feed(self, rows: np.ndarray) -> None:
        rows = np.asarray(rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] == 0:
            return
        base = self._rows_seen - self._tail.shape[0]
        U = np.vstack([self._tail, rows])
        self._rows_seen += rows.shape[0]
        v_first = self._vel_start + self._vel.shape[0]
        v_last = self._rows_seen - 2  # central difference needs the next row
        if v_last >= v_first:
            g = np.arange(v_first, v_last + 1)
            lo = np.maximum(g - 1, 0) - base
            hi = g + 1 - base
            span = np.where(g == 0, 1.0, 2.0) * self.dt
            v = (U[hi] - U[lo]) / span[:, None]
            self._append_velocity(v)
        self._tail = U[-2:].copy()

    def finish(self) -> PressureTrace:
        if not self._finished:
            if self._rows_seen >= 2:
                U = self._tail
                self._append_velocity(((U[-1] - U[-2]) / self.dt)[None, :])
            self._finished = True
        samples = np.concatenate(self._pressure) if self._pressure else np.zeros(0)
        return PressureTrace(samples, self.dt)

    def _append_velocity(self, v: np.ndarray) -> None:
        self._vel = np.vstack([self._vel, v])
        v_end = self._vel_start + self._vel.shape[0]  # exclusive
        ks = np.arange(self._p_next, v_end)
        p = np.zeros(ks.size)
        nv = self._vel.shape[0]
        for n in range(self._vel.shape[1]):
            j1 = ks - self.delay_int[n] - self._vel_start
            j0 = j1 - 1
            col = self._vel[:, n]
            f = self.delay_frac[n]
            upper = np.where(j1 + self._vel_start >= 0, col[np.clip(j1, 0, nv - 1)], 0.0)
            lower = np.where(j0 + self._vel_start >= 0, col[np.clip(j0, 0, nv - 1)], 0.0)
            p += self.weights[n] * ((1.0 - f) * upper + f * lower)
        self._pressure.append(p)
        self._p_next = v_end
        # keep only what later samples can still reach
        keep_from = self._p_next - int(self.delay_int.max()) - 2
        drop = keep_from - self._vel_start
        if drop > 0:
            self._vel = self._vel[drop:]
            self._vel_start += drop


def radiated_pressure(history: WaveHistory, geometry: ListenerGeometry) -> PressureTrace:
    rad = RetardedRadiator(history.node_count, history.dx_m, history.dt_s, geometry)
    rad.feed(history.data)
    return rad.finish()


def radiate_blocks(blocks: Iterable[np.ndarray], node_count: int, dx: float, dt: float,
                   geometry: ListenerGeometry) -> PressureTrace:
    rad = RetardedRadiator(node_count, dx, dt, geometry)
    for block in blocks:
        rad.feed(block)
    return rad.finish()


def onset_sample(geometry: ListenerGeometry, dt: float) -> int:
    """Index of the first sample that can carry sound from the nearest node."""
    return int(math.floor(geometry.standoff_m / geometry.sound_speed / dt))


def decimation_factor(sample_rate: float, target: float = CD_RATE) -> int:
    """Integer averaging factor towards ``target``; 1 below twice the target."""
    if sample_rate < 2 * target:
        return 1
    return int(sample_rate // target)


def decimate(samples: np.ndarray, factor: int) -> np.ndarray:
    """Average non-overlapping groups of ``factor`` samples (tail dropped)."""
    if factor <= 1:
        return np.asarray(samples, dtype=float)
    samples = np.asarray(samples, dtype=float)
    m = samples.size // factor
    return samples[: m * factor].reshape(m, factor).mean(axis=1)


def normalize(samples) -> np.ndarray:
    """Divide by the largest absolute sample so the peak magnitude is exactly 1."""
    samples = np.asarray(getattr(samples, "samples", samples), dtype=float)
    peak = np.max(np.abs(samples)) if samples.size else 0.0
    if not peak > 0:
        raise SilentSignalError("cannot normalise a silent signal")
    out = samples / peak
    # division can land one ulp past 1 in magnitude
    return np.clip(out, -1.0, 1.0)


def quantize_pcm16(normalized) -> np.ndarray:
    """``floor(A * 32767)`` clamped to the signed 16-bit range."""
    a = np.asarray(normalized, dtype=float)
    if a.size and (not np.all(np.isfinite(a)) or a.min() < -1.0 or a.max() > 1.0):
        raise ValueError("normalized samples must lie in [-1, 1]")
    q = np.floor(a * PCM16_MAX)
    return np.clip(q, PCM16_MIN, PCM16_MAX).astype(np.int16)


def wav_header(sample_count: int, sample_rate: int) -> bytes:
    """Canonical 44-byte RIFF/WAVE header for mono 16-bit PCM."""
    data_bytes = 2 * sample_count
    return struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + data_bytes, b"WAVE",
        b"fmt ", 16, 1, 1, sample_rate, sample_rate * 2, 2, 16,
        b"data", data_bytes,
    )


def write_wav(buffer: AudioBuffer, path: str | Path) -> Path:
    samples = np.asarray(buffer.samples, dtype="<i2")
    if samples.size == 0:
        raise ValueError("refusing to write an empty WAV file")
    path = Path(path)
    try:
        with open(path, "wb") as fh:
            fh.write(wav_header(samples.size, int(buffer.sample_rate)))
            fh.write(samples.tobytes())
    except OSError as exc:
        raise WavIOError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_wav(path: str | Path) -> AudioBuffer:
    """Read a mono 16-bit PCM file with the standard library reader."""
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as wf:
            if wf.getnchannels() != 1 or wf.getsampwidth() != 2:
                raise WavIOError(f"{path}: expected mono 16-bit PCM")
            rate = wf.getframerate()
            frames = wf.readframes(wf.getnframes())
    except (OSError, wave.Error) as exc:
        if isinstance(exc, WavIOError):
            raise
        raise WavIOError(f"cannot read {path}: {exc}") from exc
    return AudioBuffer(np.frombuffer(frames, dtype="<i2").astype(np.int16), rate)


def to_audio(trace: PressureTrace | np.ndarray, sample_rate: float,
             decimate_to_cd: bool = False) -> AudioBuffer:
    """Normalise, optionally decimate towards 44.1 kHz, and quantise."""
    samples = np.asarray(getattr(trace, "samples", trace), dtype=float)
    rate = sample_rate
    if decimate_to_cd:
        factor = decimation_factor(rate)
        samples = decimate(samples, factor)
        rate = rate / factor
    return AudioBuffer(quantize_pcm16(normalize(samples)), int(round(rate)))
