"""Dataset generation: magnitudes, normalization, and Butterworth filtering.

Produces every dataset kind a metric can consume from one raw recording:
the raw axes pass through, the axes and the raw magnitude are bandpassed
(FXYZ, FMpost), FMpre is the magnitude of the filtered axes, UFNM is the
gravity-normalized magnitude, and the HFEN input gets its own high-pass
pipeline.

Filtering is causal (forward-only, zero initial state) by default to mirror
what in-device processing can do; set ``zero_phase=True`` for
forward-backward filtering.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal as spsignal

from .core import (
    FILTERED_AXES,
    UNFILTERED_AXES,
    DatasetKind,
    PreprocessedSeries,
    RawRecording,
    as_float_array,
)
from .errors import InvalidCutoffs, SeriesMismatch, UnstableDesign

BANDPASS = "bandpass"
HIGHPASS = "highpass"


@dataclass(frozen=True)
class FilterSpec:
    """Butterworth filter parameters.

    ``order`` counts analog prototype poles; a bandpass realization carries
    twice that many. For a highpass, ``f_low_hz`` is the cutoff and
    ``f_high_hz`` must be None.
    """

    topology: str
    order: int
    f_low_hz: float
    f_high_hz: Optional[float]
    sample_rate_hz: float
    family: str = "butterworth"

    def __post_init__(self):
        if self.family != "butterworth":
            raise ValueError(f"unsupported filter family: {self.family}")
        if self.topology not in (BANDPASS, HIGHPASS):
            raise ValueError(f"unsupported topology: {self.topology}")
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        nyquist = self.sample_rate_hz / 2.0
        if self.topology == BANDPASS:
            if self.f_high_hz is None:
                raise InvalidCutoffs("bandpass needs both cutoffs")
            if not (0.0 < self.f_low_hz < self.f_high_hz < nyquist):
                raise InvalidCutoffs(
                    f"need 0 < f_low < f_high < {nyquist} Hz, got "
                    f"({self.f_low_hz}, {self.f_high_hz})"
                )
        else:
            if self.f_high_hz is not None:
                raise InvalidCutoffs("highpass takes a single cutoff in f_low_hz")
            if not (0.0 < self.f_low_hz < nyquist):
                raise InvalidCutoffs(
                    f"need 0 < cutoff < {nyquist} Hz, got {self.f_low_hz}"
                )


def default_bandpass(
    sample_rate_hz: float,
    order: int = 3,
    f_low_hz: float = 0.25,
    f_high_hz: float = 2.5,
) -> FilterSpec:
    """The shared bandpass applied to axes and to the raw magnitude."""
    return FilterSpec(BANDPASS, order, f_low_hz, f_high_hz, sample_rate_hz)


def hfen_highpass(
    sample_rate_hz: float, order: int = 4, cutoff_hz: float = 0.2
) -> FilterSpec:
    """The per-axis highpass feeding the HFEN magnitude."""
    return FilterSpec(HIGHPASS, order, cutoff_hz, None, sample_rate_hz)


@dataclass(frozen=True, eq=False)
class FilterRealization:
    """Cascade of second-order sections; state starts at zero each call."""

    spec: FilterSpec
    sos: np.ndarray

    def __post_init__(self):
        sos = np.ascontiguousarray(np.asarray(self.sos, dtype=float))
        sos.setflags(write=False)
        object.__setattr__(self, "sos", sos)

    def dc_gain(self) -> float:
        """|H| at z = 1."""
        b = self.sos[:, :3].sum(axis=1)
        a = self.sos[:, 3:].sum(axis=1)
        return float(abs(np.prod(b / a)))

    def poles(self) -> np.ndarray:
        return np.concatenate([np.roots(section[3:]) for section in self.sos])

    def max_pole_magnitude(self) -> float:
        return float(np.max(np.abs(self.poles())))

    def magnitude_response(self, freqs_hz) -> np.ndarray:
        """|H| evaluated at the given frequencies."""
        _, h = spsignal.sosfreqz(
            self.sos, worN=np.atleast_1d(freqs_hz), fs=self.spec.sample_rate_hz
        )
        return np.abs(h)


def design_filter(spec: FilterSpec) -> FilterRealization:
    """Design the Butterworth realization for ``spec``.

    Bilinear transform of the analog prototype with frequency prewarping,
    returned as a second-order-section cascade. Deterministic: the same
    spec always yields bitwise-identical coefficients.
    """
    if spec.topology == BANDPASS:
        wn = (spec.f_low_hz, spec.f_high_hz)
    else:
        wn = spec.f_low_hz
    sos = spsignal.butter(
        spec.order, wn, btype=spec.topology, fs=spec.sample_rate_hz, output="sos"
    )
    realization = FilterRealization(spec=spec, sos=sos)
    if realization.max_pole_magnitude() >= 1.0:
        raise UnstableDesign(f"pole on or outside the unit circle for {spec}")
    return realization


def filter_values(
    values: np.ndarray, realization: FilterRealization, zero_phase: bool = False
) -> np.ndarray:
    """Filter a bare array; causal with zero initial state unless zero_phase."""
    # sosfilt wants writable buffers; our arrays are read-only by contract
    x = np.array(values, dtype=float)
    sos = np.array(realization.sos)
    if zero_phase:
        return spsignal.sosfiltfilt(sos, x)
    return spsignal.sosfilt(sos, x)


_FILTERED_KIND = {
    DatasetKind.UFX: DatasetKind.FX,
    DatasetKind.UFY: DatasetKind.FY,
    DatasetKind.UFZ: DatasetKind.FZ,
    DatasetKind.UFM: DatasetKind.FMPOST,
}


def apply_filter(
    series: PreprocessedSeries,
    realization: FilterRealization,
    zero_phase: bool = False,
) -> PreprocessedSeries:
    """Run a series through a realization, keeping length.

    Raw axes map to FX/FY/FZ, the raw magnitude to FMpost. The startup
    transient is kept in the output; trimming is the caller's business.
    """
    if abs(series.sample_rate_hz - realization.spec.sample_rate_hz) > 1e-9:
        raise SeriesMismatch(
            f"series at {series.sample_rate_hz} Hz vs filter designed for "
            f"{realization.spec.sample_rate_hz} Hz"
        )
    out_kind = _FILTERED_KIND.get(series.kind)
    if out_kind is None:
        raise SeriesMismatch(f"no filtered counterpart for kind {series.kind}")
    filtered = filter_values(series.values, realization, zero_phase)
    return PreprocessedSeries(
        kind=out_kind,
        values=filtered,
        sample_rate_hz=series.sample_rate_hz,
        provenance=realization.spec,
    )


def magnitude(x, y, z, sample_rate_hz: float) -> PreprocessedSeries:
    """Elementwise Euclidean norm of the three raw axes (UFM, all >= 0)."""
    ax, ay, az = as_float_array(x), as_float_array(y), as_float_array(z)
    if not (ax.size == ay.size == az.size):
        raise SeriesMismatch(
            f"axis lengths differ: x={ax.size} y={ay.size} z={az.size}"
        )
    values = np.sqrt(ax * ax + ay * ay + az * az)
    return PreprocessedSeries(DatasetKind.UFM, values, sample_rate_hz)


def normalize_magnitude(ufm: PreprocessedSeries) -> PreprocessedSeries:
    """UFNM[k] = |UFM[k] - 1 g|: gravity removed without filtering."""
    if ufm.kind is not DatasetKind.UFM:
        raise SeriesMismatch(f"normalization expects UFM input, got {ufm.kind}")
    return PreprocessedSeries(
        DatasetKind.UFNM, np.abs(ufm.values - 1.0), ufm.sample_rate_hz
    )


def fmpre(
    fx: PreprocessedSeries, fy: PreprocessedSeries, fz: PreprocessedSeries
) -> PreprocessedSeries:
    """Magnitude of the three bandpassed axes (FMpre, all >= 0)."""
    expected = (DatasetKind.FX, DatasetKind.FY, DatasetKind.FZ)
    kinds = (fx.kind, fy.kind, fz.kind)
    if kinds != expected:
        raise SeriesMismatch(f"expected kinds {expected}, got {kinds}")
    if not (fx.n_samples == fy.n_samples == fz.n_samples):
        raise SeriesMismatch("filtered axes differ in length")
    values = np.sqrt(fx.values ** 2 + fy.values ** 2 + fz.values ** 2)
    return PreprocessedSeries(
        DatasetKind.FMPRE, values, fx.sample_rate_hz, provenance=fx.provenance
    )


def hfen_preprocess(
    rec: RawRecording,
    spec: Optional[FilterSpec] = None,
    zero_phase: bool = False,
) -> PreprocessedSeries:
    """High-pass each raw axis, then take the elementwise magnitude.

    Gravity is eliminated per axis by the highpass before the norm, so the
    output decays toward zero on a motionless recording.
    """
    spec = spec or hfen_highpass(rec.sample_rate_hz)
    realization = design_filter(spec)
    hx = filter_values(rec.x, realization, zero_phase)
    hy = filter_values(rec.y, realization, zero_phase)
    hz = filter_values(rec.z, realization, zero_phase)
    values = np.sqrt(hx * hx + hy * hy + hz * hz)
    return PreprocessedSeries(
        DatasetKind.HFEN_SPECIAL, values, rec.sample_rate_hz, provenance=spec
    )


def preprocess_all(
    rec: RawRecording,
    bandpass: Optional[FilterSpec] = None,
    hfen_spec: Optional[FilterSpec] = None,
    zero_phase: bool = False,
) -> dict[DatasetKind, PreprocessedSeries]:
    """Produce every dataset kind from one recording (11 in total)."""
    bandpass = bandpass or default_bandpass(rec.sample_rate_hz)
    realization = design_filter(bandpass)
    fs = rec.sample_rate_hz

    out: dict[DatasetKind, PreprocessedSeries] = {}
    for kind, values in zip(UNFILTERED_AXES, (rec.x, rec.y, rec.z)):
        out[kind] = PreprocessedSeries(kind, values, fs)
    for raw_kind, filt_kind in zip(UNFILTERED_AXES, FILTERED_AXES):
        out[filt_kind] = apply_filter(out[raw_kind], realization, zero_phase)

    ufm = magnitude(rec.x, rec.y, rec.z, fs)
    out[DatasetKind.UFM] = ufm
    out[DatasetKind.UFNM] = normalize_magnitude(ufm)
    out[DatasetKind.FMPRE] = fmpre(
        out[DatasetKind.FX], out[DatasetKind.FY], out[DatasetKind.FZ]
    )
    out[DatasetKind.FMPOST] = apply_filter(ufm, realization, zero_phase)
    out[DatasetKind.HFEN_SPECIAL] = hfen_preprocess(rec, hfen_spec, zero_phase)
    return out
