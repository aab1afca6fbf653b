"""Plucked-string and hemispherical-bell vibration simulation with audio output."""

from ._backend import BACKEND
from .acoustics import (AudioBuffer, PressureTrace, SilentSignalError, WavIOError, normalize,
                        quantize_pcm16, radiated_pressure, read_wav, to_audio, write_wav)
from .analytic import analytic_displacement, modal_coefficients
from .bell import (BellMode, OverdampedModeError, biharmonic_apply, bell_modes,
                   legendre_coefficients, mode_frequency, p_at_one, shell_coefficients,
                   synthesize_bell)
from .fdm import (DivergenceError, WaveHistory, fdm_coefficients, fdm_step_damped,
                  fdm_step_undamped, pluck_profile, simulate_fdm)
from .fem import assemble_global, fem_step, simulate_fem
from .harness import (SweepReport, SweepSpec, render_bell, render_string, run_sweep,
                      stability_search, timing_benchmark)
from .params import (ALUMINUM_BELL, NYLON_B3, REAL_GUITAR_B3, SWEEP_REFERENCE, BellConfig,
                     ConfigError, DomainError, ListenerGeometry, StringConfig,
                     fundamental_frequency, wave_speed)
from .spectral import fft_magnitude, harmonic_peaks, period_estimate, relative_error

__version__ = "0.1.0"
