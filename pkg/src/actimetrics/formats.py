"""File formats: recordings (CSV and native binary), results, matrices.

Recording CSV: header ``x,y,z`` (an optional leading ``t`` column is
accepted and ignored), numeric body in g. The sample rate comes from an
argument or from a JSON sidecar next to the file (``<name>.json`` with a
``sample_rate_hz`` key).

Native binary (.actm): 16-byte little-endian header - magic ``ACTM``,
version u16, sample rate u16 in deci-hertz, sample count u64 - followed by
interleaved x,y,z float32 samples in g. Write-then-read round-trips
bitwise.

Result files are plain CSV with ``#``-prefixed metadata lines, plus a
machine-readable JSON twin for correlation matrices.
"""
from __future__ import annotations

import csv
import json
import math
import struct
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .analysis import CorrelationSummary, SweepCurve
from .core import ActivitySignal, RawRecording
from .errors import (
    BadMagic,
    MissingSampleRate,
    ParseError,
    TruncatedPayload,
    VersionUnsupported,
)

PathLike = Union[str, Path]


def _r(value) -> str:
    """Shortest round-trip decimal text of a float (plain, not numpy repr)."""
    return repr(float(value))

MAGIC = b"ACTM"
BIN_VERSION = 1
_HEADER = struct.Struct("<4sHHQ")


def _sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def read_recording_csv(
    path: PathLike,
    sample_rate_hz: Optional[float] = None,
    subject_id: Optional[str] = None,
) -> RawRecording:
    """Read a recording from CSV; parse failures name the offending line."""
    path = Path(path)
    sidecar = _sidecar_path(path)
    meta = {}
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
    if sample_rate_hz is None:
        sample_rate_hz = meta.get("sample_rate_hz")
    if sample_rate_hz is None:
        raise MissingSampleRate(
            f"{path}: supply a sample rate or a sidecar {sidecar.name}"
        )
    if subject_id is None:
        subject_id = meta.get("subject_id", path.stem)

    xs: list[float] = []
    ys: list[float] = []
    zs: list[float] = []
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header:
            raise ParseError(1, "empty file, expected header 'x,y,z'")
        columns = [c.strip().lower() for c in header.strip().split(",")]
        if columns == ["t", "x", "y", "z"]:
            offset = 1
        elif columns == ["x", "y", "z"]:
            offset = 0
        else:
            raise ParseError(
                1, f"expected columns 'x,y,z' (optional leading 't'), got {columns}"
            )
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != 3 + offset:
                raise ParseError(lineno, f"expected {3 + offset} columns, got {len(cells)}")
            try:
                xs.append(float(cells[offset]))
                ys.append(float(cells[offset + 1]))
                zs.append(float(cells[offset + 2]))
            except ValueError as exc:
                raise ParseError(lineno, f"non-numeric cell: {exc}") from None

    return RawRecording(
        subject_id=subject_id,
        sample_rate_hz=float(sample_rate_hz),
        x=xs,
        y=ys,
        z=zs,
        start_time=meta.get("start_time"),
    )


def write_recording_csv(rec: RawRecording, path: PathLike) -> None:
    """Write a recording plus its JSON sidecar carrying the sample rate."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write("x,y,z\n")
        for x, y, z in zip(rec.x, rec.y, rec.z):
            fh.write(f"{_r(x)},{_r(y)},{_r(z)}\n")
    sidecar = {
        "subject_id": rec.subject_id,
        "sample_rate_hz": rec.sample_rate_hz,
    }
    if rec.start_time is not None:
        sidecar["start_time"] = rec.start_time
    _sidecar_path(path).write_text(json.dumps(sidecar, sort_keys=True) + "\n")


def read_recording_bin(path: PathLike, subject_id: Optional[str] = None) -> RawRecording:
    """Read the native binary format; header errors are typed."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise TruncatedPayload(f"{path}: {len(blob)} bytes is too short for a header")
    magic, version, deci_hz, count = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise BadMagic(f"{path}: magic {magic!r}, expected {MAGIC!r}")
    if version != BIN_VERSION:
        raise VersionUnsupported(f"{path}: version {version}, supported: {BIN_VERSION}")
    need = count * 3 * 4
    payload = blob[_HEADER.size :]
    if len(payload) < need:
        raise TruncatedPayload(
            f"{path}: header declares {count} samples ({need} bytes), payload has "
            f"{len(payload)}"
        )
    data = np.frombuffer(payload[:need], dtype="<f4").reshape(count, 3)
    return RawRecording(
        subject_id=subject_id or path.stem,
        sample_rate_hz=deci_hz / 10.0,
        x=data[:, 0].astype(float),
        y=data[:, 1].astype(float),
        z=data[:, 2].astype(float),
    )


def write_recording_bin(rec: RawRecording, path: PathLike) -> None:
    """Write the native binary format (samples quantized to float32)."""
    deci = rec.sample_rate_hz * 10.0
    if abs(deci - round(deci)) > 1e-9 or not 0 < round(deci) < 2 ** 16:
        raise ValueError(
            f"sample rate {rec.sample_rate_hz} Hz is not representable in deci-hertz"
        )
    n = rec.n_samples
    interleaved = np.empty((n, 3), dtype="<f4")
    interleaved[:, 0] = rec.x
    interleaved[:, 1] = rec.y
    interleaved[:, 2] = rec.z
    with Path(path).open("wb") as fh:
        fh.write(_HEADER.pack(MAGIC, BIN_VERSION, int(round(deci)), n))
        fh.write(interleaved.tobytes())


def read_recording(
    path: PathLike,
    sample_rate_hz: Optional[float] = None,
    subject_id: Optional[str] = None,
) -> RawRecording:
    """Dispatch on extension: .csv or the native binary format."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_recording_csv(path, sample_rate_hz, subject_id)
    return read_recording_bin(path, subject_id)


# ---------------------------------------------------------------------------
# result serialization


def label_slug(label: str) -> str:
    """Filesystem-safe variant of a label, stable and collision-free."""
    sq = "\N{SUPERSCRIPT TWO}"
    out = label.replace(")" + sq, ")_squared").replace(sq, "sq")
    for ch in "[]() ,":
        out = out.replace(ch, "_")
    while "__" in out:
        out = out.replace("__", "_")
    return out.strip("_")


def write_activity_csv(sig: ActivitySignal, path: PathLike) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"# label: {sig.label}\n")
        fh.write(f"# units: {sig.units}\n")
        fh.write(f"# epoch_length_s: {_r(sig.epoch_length_s)}\n")
        fh.write("epoch_index,value\n")
        for i, v in enumerate(sig.values):
            fh.write(f"{i},{_r(v)}\n")


def _fmt_stat(value: float, decimals: int) -> str:
    if not math.isfinite(value):
        return "NA"
    text = f"{value:.{decimals}f}".rstrip("0").rstrip(".")
    if text in ("-0", ""):
        text = "0"
    return text


def format_mean_sd(mean: float, sd: float) -> str:
    """Cell text like ``0.98971±0.04`` (mean to 5 decimals, SD to 2)."""
    if not (math.isfinite(mean) and math.isfinite(sd)):
        return "NA"
    return f"{_fmt_stat(mean, 5)}±{_fmt_stat(sd, 2)}"


def write_matrix_csv(summary: CorrelationSummary, path: PathLike) -> None:
    # labels may contain commas (combination variants), so quote properly
    labels = summary.labels
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write(f"# domain: {summary.domain.value}\n")
        fh.write(f"# n_subjects: {summary.n_subjects}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("",) + labels)
        for i, label in enumerate(labels):
            cells = [
                format_mean_sd(summary.mean[i, j], summary.sd[i, j])
                for j in range(len(labels))
            ]
            writer.writerow([label] + cells)


def write_matrix_json(summary: CorrelationSummary, path: PathLike) -> None:
    payload = {
        "domain": summary.domain.value,
        "n_subjects": summary.n_subjects,
        "labels": list(summary.labels),
        "mean": [[None if not math.isfinite(v) else v for v in row]
                 for row in summary.mean.tolist()],
        "sd": [[None if not math.isfinite(v) else v for v in row]
               for row in summary.sd.tolist()],
        "excluded_pairs": int(np.count_nonzero(summary.excluded)),
        "excluded": summary.excluded.tolist(),
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n")


def write_sweep_csv(curve: SweepCurve, path: PathLike) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"# metric: {curve.metric.value}\n")
        fh.write(f"# kind: {curve.kind.value}\n")
        fh.write(f"# sd_marker: {_r(curve.sd_marker)}\n")
        fh.write(f"# sd_anchor_r_vs_enmo: {_r(curve.sd_anchor_r_vs_enmo)}\n")
        fh.write(f"# sd_anchor_r_vs_hfen: {_r(curve.sd_anchor_r_vs_hfen)}\n")
        fh.write("threshold_g,r_vs_enmo,r_vs_hfen,r_vs_sd_anchored\n")
        for i in range(curve.thresholds.size):
            fh.write(
                f"{_r(curve.thresholds[i])},{_r(curve.r_vs_enmo[i])},"
                f"{_r(curve.r_vs_hfen[i])},{_r(curve.r_vs_sd_anchored[i])}\n"
            )
