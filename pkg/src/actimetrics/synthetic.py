"""Seedable synthetic wrist-motion generator for tests and demos.

Recordings alternate rest and active bouts. Rest emits gravity along a
fixed orientation plus white noise; active bouts add a sinusoidal
oscillation on all three axes whose per-bout amplitude can jitter. The
same spec and seed always produce the identical recording.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import RawRecording


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of one synthetic subject."""

    subject_id: str = "synthetic"
    duration_s: float = 3600.0
    sample_rate_hz: float = 10.0
    rest_s: float = 1500.0
    active_s: float = 900.0
    active_freq_hz: float = 1.5
    active_amp_g: float = 0.5
    amp_jitter: float = 0.0
    orientation: tuple[float, float, float] = (0.0, 0.0, 1.0)
    noise_sd_g: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.duration_s <= 0 or self.sample_rate_hz <= 0:
            raise ValueError("duration and sample rate must be positive")
        if self.rest_s < 0 or self.active_s < 0:
            raise ValueError("bout durations must be >= 0")
        if self.active_amp_g < 0 or self.noise_sd_g < 0:
            raise ValueError("amplitudes must be >= 0")
        if not 0.0 <= self.amp_jitter <= 1.0:
            raise ValueError("amp_jitter is a fraction in [0, 1]")
        if self.active_s > 0 and not 0.5 <= self.active_freq_hz <= 3.0:
            raise ValueError("active oscillation frequency must lie within 0.5-3 Hz")
        norm = math.sqrt(sum(c * c for c in self.orientation))
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"orientation must be a unit vector, |v| = {norm}")


def synthesize(spec: SyntheticSpec) -> RawRecording:
    """Generate the recording described by ``spec``."""
    rng = np.random.default_rng(spec.seed)
    n = int(round(spec.duration_s * spec.sample_rate_hz))
    t = np.arange(n) / spec.sample_rate_hz

    axes = [np.full(n, g_component) for g_component in spec.orientation]
    if spec.noise_sd_g > 0:
        for i in range(3):
            axes[i] = axes[i] + rng.normal(0.0, spec.noise_sd_g, n)

    cycle = spec.rest_s + spec.active_s
    if spec.active_s > 0 and cycle > 0:
        bout = 0
        while True:
            start_s = bout * cycle + spec.rest_s
            if start_s >= spec.duration_s:
                break
            stop_s = min(start_s + spec.active_s, spec.duration_s)
            lo = int(round(start_s * spec.sample_rate_hz))
            hi = min(int(round(stop_s * spec.sample_rate_hz)), n)
            amp = spec.active_amp_g
            if spec.amp_jitter > 0:
                amp *= 1.0 + spec.amp_jitter * rng.uniform(-1.0, 1.0)
            phases = rng.uniform(0.0, 2.0 * math.pi, 3)
            if hi > lo:
                segment_t = t[lo:hi]
                for i in range(3):
                    axes[i][lo:hi] += amp * np.sin(
                        2.0 * math.pi * spec.active_freq_hz * segment_t + phases[i]
                    )
            bout += 1

    return RawRecording(
        subject_id=spec.subject_id,
        sample_rate_hz=spec.sample_rate_hz,
        x=axes[0],
        y=axes[1],
        z=axes[2],
    )
