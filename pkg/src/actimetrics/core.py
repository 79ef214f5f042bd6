"""Domain types, recording validation, and epoch slicing.

All types are immutable after construction (array fields are made
read-only) and safe to share across threads; every operation here is a
pure function of its inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import EmptySeries, EpochTooShort

DEFAULT_FULL_SCALE_G = 8.0


def as_float_array(values) -> np.ndarray:
    """Coerce to a read-only, contiguous 1-D float64 array."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D sequence, got shape {arr.shape}")
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


class DatasetKind(Enum):
    """Preprocessing outputs an activity metric can be applied to.

    UFX/UFY/UFZ are the raw axial accelerations; FX/FY/FZ their bandpassed
    counterparts. UFM is the raw vector magnitude, UFNM = |UFM - 1 g|,
    FMpre the magnitude of the filtered axes, FMpost the filtered raw
    magnitude, and HFEN_SPECIAL the high-passed-axes magnitude consumed
    only by the HFEN metric.
    """

    UFX = "UFX"
    UFY = "UFY"
    UFZ = "UFZ"
    FX = "FX"
    FY = "FY"
    FZ = "FZ"
    UFM = "UFM"
    UFNM = "UFNM"
    FMPRE = "FMpre"
    FMPOST = "FMpost"
    HFEN_SPECIAL = "HFEN_SPECIAL"

    def __str__(self) -> str:
        return self.value

    @property
    def is_axis(self) -> bool:
        return self in UNFILTERED_AXES or self in FILTERED_AXES

    @property
    def is_unfiltered_axis(self) -> bool:
        return self in UNFILTERED_AXES

    @property
    def is_filtered_axis(self) -> bool:
        return self in FILTERED_AXES

    @property
    def is_magnitude(self) -> bool:
        return self in (
            DatasetKind.UFM,
            DatasetKind.UFNM,
            DatasetKind.FMPRE,
            DatasetKind.FMPOST,
        )


UNFILTERED_AXES = (DatasetKind.UFX, DatasetKind.UFY, DatasetKind.UFZ)
FILTERED_AXES = (DatasetKind.FX, DatasetKind.FY, DatasetKind.FZ)


@dataclass(frozen=True, eq=False)
class RawRecording:
    """Triaxial acceleration samples in g at a fixed sampling rate.

    The constructor only enforces what later math cannot survive without
    (positive rate, 1-D arrays); value-level problems such as NaNs, axis
    length mismatches, or out-of-range samples are reported by
    :func:`validate_recording` so callers can decide what to do.
    """

    subject_id: str
    sample_rate_hz: float
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    start_time: Optional[str] = None

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, as_float_array(getattr(self, name)))

    @property
    def ts(self) -> float:
        """Sampling time in seconds."""
        return 1.0 / self.sample_rate_hz

    @property
    def n_samples(self) -> int:
        return int(self.x.size)

    @property
    def duration_s(self) -> float:
        return self.n_samples * self.ts


@dataclass(frozen=True)
class Finding:
    """One validation problem; ``axis``/``index`` locate it when sample-level."""

    code: str
    message: str
    axis: Optional[str] = None
    index: Optional[int] = None


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...]

    @property
    def ok(self) -> bool:
        return not self.findings

    def summary(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(f.message for f in self.findings)


def validate_recording(
    rec: RawRecording, full_scale_g: float = DEFAULT_FULL_SCALE_G
) -> ValidationReport:
    """Check a recording against its invariants and report every violation.

    Pure: the same recording always yields an identical report. Sample-level
    findings name the axis and the first offending index, plus a count.
    """
    findings: list[Finding] = []
    sizes = {"x": rec.x.size, "y": rec.y.size, "z": rec.z.size}
    if len(set(sizes.values())) != 1:
        detail = " ".join(f"{k}={v}" for k, v in sizes.items())
        findings.append(Finding("length-mismatch", f"axis lengths differ: {detail}"))
    if min(sizes.values()) < 1:
        findings.append(Finding("empty", "recording holds no samples"))

    for axis in ("x", "y", "z"):
        values = getattr(rec, axis)
        bad = ~np.isfinite(values)
        if bad.any():
            i = int(np.argmax(bad))
            findings.append(
                Finding(
                    "non-finite",
                    f"{axis}[{i}] is non-finite ({int(bad.sum())} total on {axis})",
                    axis=axis,
                    index=i,
                )
            )
        over = np.abs(values) > full_scale_g
        over &= np.isfinite(values)
        if over.any():
            i = int(np.argmax(over))
            findings.append(
                Finding(
                    "out-of-range",
                    f"{axis}[{i}] = {float(values[i])!r} g exceeds the "
                    f"+/-{full_scale_g} g full scale ({int(over.sum())} total on {axis})",
                    axis=axis,
                    index=i,
                )
            )
    return ValidationReport(tuple(findings))


@dataclass(frozen=True, eq=False)
class PreprocessedSeries:
    """A sample stream tagged with the dataset kind that produced it.

    ``provenance`` carries the filter parameters used, when any. Filtering
    never changes length, so the series always matches its source
    recording sample-for-sample.
    """

    kind: DatasetKind
    values: np.ndarray
    sample_rate_hz: float
    provenance: Optional[object] = None

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "values", as_float_array(self.values))

    @property
    def ts(self) -> float:
        return 1.0 / self.sample_rate_hz

    @property
    def n_samples(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True, eq=False)
class Epoch:
    """One fixed-length slot of samples; ``index`` is its ordinal position."""

    values: np.ndarray
    ts: float
    index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values", as_float_array(self.values))
        if self.values.size < 2:
            raise EpochTooShort(f"epoch needs >= 2 samples, got {self.values.size}")
        if self.ts <= 0:
            raise ValueError("ts must be positive")

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def duration_s(self) -> float:
        return self.n * self.ts


@dataclass(frozen=True, eq=False)
class ActivitySignal:
    """One activity value per epoch for a single variant.

    ``label`` is the variant's canonical name; ``variant`` optionally holds
    the full descriptor that produced the signal. Values are non-negative
    for every cataloged variant.
    """

    label: str
    epoch_length_s: float
    values: np.ndarray
    units: str = ""
    variant: Optional[object] = None

    def __post_init__(self):
        object.__setattr__(self, "values", as_float_array(self.values))

    @property
    def n_epochs(self) -> int:
        return int(self.values.size)


def epoch_sample_count(te_s: float, sample_rate_hz: float) -> int:
    """Samples per epoch, n = round(Te * fs); at least 2."""
    n = int(round(te_s * sample_rate_hz))
    if n < 2:
        raise EpochTooShort(
            f"Te={te_s} s at {sample_rate_hz} Hz gives {n} samples per epoch (need >= 2)"
        )
    return n


def epoch_matrix(values: np.ndarray, n: int) -> np.ndarray:
    """View of the first floor(N/n)*n samples shaped (epochs, n).

    The trailing partial epoch, if any, is discarded.
    """
    m = values.size // n
    if m == 0:
        raise EmptySeries(f"series of {values.size} samples is shorter than one epoch ({n})")
    return values[: m * n].reshape(m, n)


def slice_epochs(series: PreprocessedSeries, te_s: float) -> list[Epoch]:
    """Cut a series into contiguous, non-overlapping epochs of Te seconds."""
    n = epoch_sample_count(te_s, series.sample_rate_hz)
    mat = epoch_matrix(series.values, n)
    ts = series.ts
    return [Epoch(values=row, ts=ts, index=i) for i, row in enumerate(mat)]
