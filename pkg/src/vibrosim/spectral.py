"""Rectangular-window FFT spectra, harmonic peak picking and error analysis."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DEFAULT_WINDOW = 4096
HARMONIC_TOLERANCE = 0.35
NOISE_FLOOR_FACTOR = 10.0


@dataclass(frozen=True)
class Spectrum:
    magnitudes: np.ndarray
    bin_hz: float
    window_size: int
    window_kind: str = "rectangular"

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.magnitudes.size) * self.bin_hz

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["frequency_hz", "magnitude"])
            for f, m in zip(self.frequencies, self.magnitudes):
                w.writerow([format(f, ".9g"), format(m, ".9g")])


@dataclass(frozen=True)
class Peak:
    frequency_hz: float
    magnitude: float
    bin_index: int


def fft_magnitude(samples, sample_rate: float, window_size: int = DEFAULT_WINDOW,
                  offset: int = 0) -> Spectrum:
    """One-sided magnitude spectrum of ``samples[offset:offset + window_size]``."""
    samples = np.asarray(samples, dtype=float)
    if offset < 0 or offset + window_size > samples.size:
        raise ValueError(
            f"window of {window_size} at offset {offset} exceeds signal of {samples.size} samples")
    frame = samples[offset:offset + window_size]
    mags = np.abs(np.fft.rfft(frame))
    return Spectrum(mags, sample_rate / window_size, window_size)


def _parabolic_offset(left: float, centre: float, right: float) -> float:
    denom = left - 2.0 * centre + right
    if denom == 0:
        return 0.0
    return 0.5 * (left - right) / denom


def refine_peak(spec: Spectrum, index: int, mode: str = "parabolic") -> Peak:
    """Frequency of the peak at ``index``: raw bin centre or parabolic vertex."""
    mags = spec.magnitudes
    if mode == "bin" or index <= 0 or index >= mags.size - 1:
        return Peak(index * spec.bin_hz, float(mags[index]), index)
    if mode != "parabolic":
        raise ValueError(f"unknown peak mode {mode!r}")
    delta = _parabolic_offset(mags[index - 1], mags[index], mags[index + 1])
    return Peak((index + delta) * spec.bin_hz, float(mags[index]), index)


def noise_floor(spec: Spectrum) -> float:
    return NOISE_FLOOR_FACTOR * float(np.median(spec.magnitudes))


def harmonic_peaks(spec: Spectrum, f1_expected: float, count: int,
                   mode: str = "parabolic") -> list[Peak | None]:
    """Largest local maximum near each ``n * f1_expected``.

    The search band is ``+-35 %`` of the harmonic spacing around each
    harmonic. A harmonic with no local maximum above the noise floor
    (ten times the median magnitude) is reported as ``None``.
    """
    if f1_expected <= 0:
        raise ValueError("f1_expected must be positive")
    mags = spec.magnitudes
    floor = noise_floor(spec)
    interior = np.zeros(mags.size, dtype=bool)
    interior[1:-1] = (mags[1:-1] >= mags[:-2]) & (mags[1:-1] >= mags[2:])
    found: list[Peak | None] = []
    for n in range(1, count + 1):
        lo = (n - HARMONIC_TOLERANCE) * f1_expected / spec.bin_hz
        hi = (n + HARMONIC_TOLERANCE) * f1_expected / spec.bin_hz
        idx = np.arange(max(1, int(np.ceil(lo))), min(mags.size - 1, int(np.floor(hi)) + 1))
        idx = idx[interior[idx] & (mags[idx] > floor)] if idx.size else idx
        if idx.size == 0:
            found.append(None)
            continue
        best = int(idx[np.argmax(mags[idx])])
        found.append(refine_peak(spec, best, mode))
    return found


def dominant_peak(spec: Spectrum, mode: str = "parabolic", min_hz: float = 0.0) -> Peak:
    start = max(1, int(np.ceil(min_hz / spec.bin_hz)))
    index = start + int(np.argmax(spec.magnitudes[start:]))
    return refine_peak(spec, index, mode)


def relative_error(measured: float | Peak | None, expected: float) -> float:
    """``|measured - expected| / expected``; a missing measurement counts as 1."""
    if expected <= 0:
        raise ValueError("expected must be positive")
    if measured is None:
        return 1.0
    if isinstance(measured, Peak):
        measured = measured.frequency_hz
    return abs(measured - expected) / expected


def zero_mean(series) -> np.ndarray:
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise ValueError("series must be nonempty")
    return series - series.mean()


def period_estimate(parameter_values, error_values, oversample: int = 64) -> float | None:
    """Dominant period of an error series along a uniformly spaced parameter axis.

    The series is mean- and trend-removed, then zero-padded by ``oversample``
    before the DFT so the peak is located between the coarse bins. Returns
    ``None`` when the dominant coarse component is below twice the median
    of the coarse spectrum.
    """
    x = np.asarray(parameter_values, dtype=float)
    y = np.asarray(error_values, dtype=float)
    if x.size != y.size or x.size < 8:
        raise ValueError("need at least 8 matching parameter/error points")
    steps = np.diff(x)
    if not np.allclose(steps, steps[0], rtol=1e-6, atol=0.0) or steps[0] == 0:
        raise ValueError("parameter values must be uniformly spaced")
    step = abs(steps[0])
    t = np.arange(x.size)
    resid = y - np.polyval(np.polyfit(t, y, 1), t)
    if np.abs(resid).max() <= 1e-12 * max(1.0, np.abs(y).max()):
        return None  # nothing but a trend
    coarse = np.abs(np.fft.rfft(resid))[1:]
    if not coarse.max() > 2.0 * np.median(coarse):
        return None
    nfft = oversample * x.size
    fine = np.abs(np.fft.rfft(resid, n=nfft))
    freqs = np.fft.rfftfreq(nfft, d=step)
    # skip the DC lobe left by the finite record
    first = int(np.ceil(oversample * 0.5))
    k = first + int(np.argmax(fine[first:]))
    return float(1.0 / freqs[k])
