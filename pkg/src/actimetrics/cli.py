"""Command-line interface chaining synth -> preprocess -> activity -> analysis.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 partial
failure (some subjects failed, others were processed).
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import formats
from .analysis import threshold_sweep
from .combine import catalog
from .config import PipelineConfig, check_epoch_alignment, load_config
from .core import DatasetKind
from .errors import ActimetricsError, ConfigError
from .metrics import MetricId
from .pipeline import process_subject, run_pipeline
from .preprocess import preprocess_all
from .synthetic import SyntheticSpec, synthesize

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_PARTIAL = 3


class _Parser(argparse.ArgumentParser):
    # usage problems should exit 1 (config error), not argparse's default 2
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="actimetrics", description=__doc__)
    parser.add_argument("--config", type=Path, help="JSON config file")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--seed", type=int, help="override the config RNG seed")
    parser.add_argument("--jobs", type=int, default=1, help="parallel subjects")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate synthetic recordings")
    synth.add_argument("--subjects", type=int, help="override synthetic.subjects")
    synth.add_argument("--format", choices=("csv", "actm"), default="actm")

    for name, help_text in (
        ("preprocess", "write every preprocessed dataset kind per subject"),
        ("activity", "write every cataloged activity signal per subject"),
        ("sweep", "write the configured threshold-sweep curves"),
        ("correlate", "run the full pipeline: activities, matrices, sweeps"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("recordings", nargs="+", type=Path)
        cmd.add_argument("--sample-rate-hz", type=float, help="rate for CSV inputs")

    sub.add_parser(
        "catalog",
        help="print the variant labels and count",
        description="Print every cataloged variant label, one per line.",
        epilog=(
            "Label grammar (stable across versions): METRIC(KIND) e.g. PIM(UFNM); "
            "METRIC(AXIS) e.g. ZCM(FY); METRIC(AXIS²) applies the metric to the "
            "squared series; METRIC(AXIS)² squares the activity signal; "
            "RULE[METRIC,FXYZ] with RULE in SUM, SQRTSUM, SUMSQ, VM3 combines "
            "per-axis activities; RULE[METRIC,FXYZ²] combines squared-series "
            "activities. ENMO and HFEN are bare: each has exactly one computation."
        ),
    )

    convert = sub.add_parser("convert", help="convert a recording between csv and actm")
    convert.add_argument("src", type=Path)
    convert.add_argument("dst", type=Path)
    convert.add_argument("--sample-rate-hz", type=float, help="rate for CSV inputs")

    return parser


def _load_recordings(paths: Sequence[Path], sample_rate_hz: Optional[float]):
    recordings = []
    for path in paths:
        recordings.append(formats.read_recording(path, sample_rate_hz))
    return recordings


def _cmd_synth(args, config: PipelineConfig) -> int:
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    n_subjects = args.subjects or config.synthetic.subjects
    synth = config.synthetic
    for i in range(n_subjects):
        spec = SyntheticSpec(
            subject_id=f"subject{i + 1:02d}",
            duration_s=synth.duration_s,
            rest_s=synth.rest_s,
            active_s=synth.active_s,
            active_freq_hz=synth.active_freq_hz,
            active_amp_g=synth.active_amp_g,
            amp_jitter=synth.amp_jitter,
            noise_sd_g=synth.noise_sd_g,
            seed=config.seed + i,
        )
        rec = synthesize(spec)
        if args.format == "csv":
            formats.write_recording_csv(rec, out / f"{spec.subject_id}.csv")
        else:
            formats.write_recording_bin(rec, out / f"{spec.subject_id}.actm")
        print(f"wrote {spec.subject_id} ({rec.n_samples} samples)")
    return EXIT_OK


def _cmd_preprocess(args, config: PipelineConfig) -> int:
    recordings = _load_recordings(args.recordings, args.sample_rate_hz)
    out: Path = args.out
    for rec in recordings:
        check_epoch_alignment(config, rec.sample_rate_hz)
        datasets = preprocess_all(
            rec,
            config.bandpass_spec(rec.sample_rate_hz),
            config.hfen_spec(rec.sample_rate_hz),
            config.zero_phase,
        )
        subject_dir = out / rec.subject_id / "datasets"
        subject_dir.mkdir(parents=True, exist_ok=True)
        for kind, series in datasets.items():
            path = subject_dir / f"{formats.label_slug(kind.value)}.csv"
            with path.open("w", encoding="utf-8") as fh:
                fh.write(f"# kind: {kind.value}\n")
                fh.write(f"# sample_rate_hz: {float(series.sample_rate_hz)!r}\n")
                fh.write("index,value\n")
                for i, v in enumerate(series.values):
                    fh.write(f"{i},{float(v)!r}\n")
        print(f"{rec.subject_id}: wrote {len(datasets)} dataset kinds")
    return EXIT_OK


def _cmd_activity(args, config: PipelineConfig) -> int:
    recordings = _load_recordings(args.recordings, args.sample_rate_hz)
    out: Path = args.out
    failed = 0
    for rec in recordings:
        try:
            signals = process_subject(rec, config)
        except ActimetricsError as exc:
            print(f"{rec.subject_id}: FAILED: {exc}", file=sys.stderr)
            failed += 1
            continue
        subject_dir = out / rec.subject_id / "activity"
        subject_dir.mkdir(parents=True, exist_ok=True)
        for label, sig in signals.items():
            formats.write_activity_csv(
                sig, subject_dir / f"{formats.label_slug(label)}.csv"
            )
        print(f"{rec.subject_id}: wrote {len(signals)} activity signals")
    if failed == len(recordings):
        return EXIT_DATA
    return EXIT_PARTIAL if failed else EXIT_OK


def _cmd_sweep(args, config: PipelineConfig) -> int:
    recordings = _load_recordings(args.recordings, args.sample_rate_hz)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    fs = recordings[0].sample_rate_hz
    for metric_name, kind_name in config.sweep_requests():
        curve = threshold_sweep(
            MetricId(metric_name),
            DatasetKind(kind_name),
            recordings,
            config.epoch_s,
            bandpass=config.bandpass_spec(fs),
            hfen_spec=config.hfen_spec(fs),
            zero_phase=config.zero_phase,
            step_g=config.sweep.step_g,
            max_steps=config.sweep.max_steps,
        )
        path = out / f"sweep_{metric_name}_{kind_name}.csv"
        formats.write_sweep_csv(curve, path)
        print(f"wrote {path.name} ({curve.thresholds.size} thresholds)")
    return EXIT_OK


def _cmd_correlate(args, config: PipelineConfig, jobs: int) -> int:
    recordings = _load_recordings(args.recordings, args.sample_rate_hz)
    manifest = run_pipeline(config, recordings, args.out, jobs=jobs)
    statuses = [s["status"] for s in manifest["subjects"]]
    n_ok = statuses.count("ok")
    print(f"processed {n_ok}/{len(statuses)} subjects, "
          f"{manifest['catalog_count']} variants each")
    if n_ok == 0:
        return EXIT_DATA
    return EXIT_PARTIAL if n_ok < len(statuses) else EXIT_OK


def _cmd_catalog(config: PipelineConfig) -> int:
    variants = catalog(config.catalog_options())
    for variant in variants:
        print(variant.label)
    print(f"total: {len(variants)} variants")
    return EXIT_OK


def _cmd_convert(args) -> int:
    rec = formats.read_recording(args.src, args.sample_rate_hz)
    if args.dst.suffix.lower() == ".csv":
        formats.write_recording_csv(rec, args.dst)
    else:
        formats.write_recording_bin(rec, args.dst)
    print(f"wrote {args.dst} ({rec.n_samples} samples at {rec.sample_rate_hz} Hz)")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        config = load_config(args.config) if args.config else PipelineConfig()
        if args.seed is not None:
            config = dataclasses.replace(config, seed=args.seed)

        if args.command == "synth":
            return _cmd_synth(args, config)
        if args.command == "preprocess":
            return _cmd_preprocess(args, config)
        if args.command == "activity":
            return _cmd_activity(args, config)
        if args.command == "sweep":
            return _cmd_sweep(args, config)
        if args.command == "correlate":
            return _cmd_correlate(args, config, args.jobs)
        if args.command == "catalog":
            return _cmd_catalog(config)
        if args.command == "convert":
            return _cmd_convert(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ActimetricsError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
