"""Diagnostics on simulated frame stacks and synthesized audio."""

from __future__ import annotations

import numpy as np

from .errors import ParameterError
from .field import ScalarFieldSeries
from .sonify import AudioClip, LoopSpec


def steady_phase_map(
    series: ScalarFieldSeries,
    frames_per_period: int,
    n_periods: int = 3,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell amplitude and phase of the drive-frequency response.

    Single-bin DFT over the last n_periods of frames, where the drive
    completes one cycle every frames_per_period frames.  Returns
    (amplitude, phase) with phase in (-pi, pi]; both are zero/undefined
    where the amplitude vanishes.
    """
    if frames_per_period < 2 or n_periods < 1:
        raise ParameterError("need at least two frames per period")
    w = frames_per_period * n_periods
    if w > series.frame_count:
        raise ParameterError("series shorter than the analysis window")
    tail = series.frames[series.frame_count - w:].astype(np.float64)
    k = np.arange(w)
    phasor = np.exp(-2j * np.pi * k / frames_per_period)
    spec = np.tensordot(phasor, tail, axes=(0, 0)) * (2.0 / w)
    return np.abs(spec), np.angle(spec)


def circular_std(phases: np.ndarray, weights: np.ndarray | None = None) -> float:
    """Circular standard deviation sqrt(-2 ln R) of a phase sample, radians."""
    phases = np.asarray(phases, dtype=np.float64).ravel()
    if phases.size == 0:
        raise ParameterError("empty phase sample")
    if weights is None:
        z = np.exp(1j * phases).mean()
    else:
        weights = np.asarray(weights, dtype=np.float64).ravel()
        total = weights.sum()
        if total <= 0:
            raise ParameterError("weights sum to zero")
        z = (weights * np.exp(1j * phases)).sum() / total
    r = min(abs(z), 1.0)
    if r == 0.0:
        return float(np.inf)
    return float(np.sqrt(-2.0 * np.log(r)))


def phase_coherence(series: ScalarFieldSeries, frames_per_period: int,
                    amp_floor: float = 0.1) -> float:
    """Circular phase spread over cells responding above amp_floor * max."""
    amp, phase = steady_phase_map(series, frames_per_period)
    strong = amp > amp_floor * amp.max()
    if not strong.any():
        raise ParameterError("no cell responds above the amplitude floor")
    return circular_std(phase[strong], weights=amp[strong])


def spectral_peak(signal: np.ndarray, fs: float, min_hz: float = 20.0) -> tuple[float, float]:
    """(frequency, magnitude) of the strongest rFFT bin at or above min_hz.

    Sub-audible bins are excluded by default: slow envelope drift otherwise
    dominates the raw spectrum and says nothing about perceived pitch.
    """
    signal = np.asarray(signal, dtype=np.float64)
    if signal.ndim == 2:
        signal = signal.mean(axis=1)
    if signal.ndim != 1 or signal.size < 2:
        raise ParameterError("need a 1d signal with at least two samples")
    mag = np.abs(np.fft.rfft(signal))
    freqs = np.fft.rfftfreq(signal.size, 1.0 / fs)
    sel = np.nonzero(freqs >= min_hz)[0]
    if sel.size == 0:
        raise ParameterError("min_hz excludes every bin")
    best = sel[np.argmax(mag[sel])]
    return float(freqs[best]), float(mag[best])


def loop_seam_jump(clip: AudioClip, loop: LoopSpec) -> float:
    """Amplitude step heard when playback wraps from loop_end to loop_start."""
    data = clip.data if clip.data.ndim == 2 else clip.data[:, np.newaxis]
    if loop.loop_end > data.shape[0]:
        raise ParameterError("loop extends past the clip")
    jump = np.abs(data[loop.loop_start] - data[loop.loop_end - 1])
    return float(jump.max())
