import json

import numpy as np
import pytest

from actimetrics import RawRecording, SyntheticSpec, synthesize
from actimetrics.errors import (
    BadMagic,
    MissingSampleRate,
    ParseError,
    TruncatedPayload,
    VersionUnsupported,
)
from actimetrics.formats import (
    format_mean_sd,
    label_slug,
    read_recording,
    read_recording_bin,
    read_recording_csv,
    write_recording_bin,
    write_recording_csv,
)


class TestCsvReader:
    def test_header_and_two_samples(self, tmp_path):
        path = tmp_path / "rec.csv"
        path.write_text("x,y,z\n0.1,0.2,0.3\n0.4,0.5,0.6\n")
        rec = read_recording_csv(path, sample_rate_hz=10.0)
        assert rec.n_samples == 2
        assert rec.subject_id == "rec"
        np.testing.assert_allclose(rec.y, [0.2, 0.5])

    def test_time_column_accepted_and_ignored(self, tmp_path):
        path = tmp_path / "rec.csv"
        path.write_text("t,x,y,z\n0.0,0.1,0.2,0.3\n0.1,0.4,0.5,0.6\n")
        rec = read_recording_csv(path, sample_rate_hz=10.0)
        np.testing.assert_allclose(rec.x, [0.1, 0.4])

    def test_non_numeric_cell_names_line(self, tmp_path):
        path = tmp_path / "rec.csv"
        path.write_text("x,y,z\n0.1,0.2,0.3\n0.1,0.2,0.3\n0.1,0.2,0.3\n0.1,oops,0.3\n")
        with pytest.raises(ParseError) as err:
            read_recording_csv(path, sample_rate_hz=10.0)
        assert err.value.line == 5

    def test_bad_header_names_expected_columns(self, tmp_path):
        path = tmp_path / "rec.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ParseError) as err:
            read_recording_csv(path, sample_rate_hz=10.0)
        assert err.value.line == 1
        assert "x,y,z" in str(err.value)

    def test_missing_sample_rate(self, tmp_path):
        path = tmp_path / "rec.csv"
        path.write_text("x,y,z\n0.1,0.2,0.3\n")
        with pytest.raises(MissingSampleRate):
            read_recording_csv(path)

    def test_sidecar_supplies_rate_and_subject(self, tmp_path):
        path = tmp_path / "rec.csv"
        path.write_text("x,y,z\n0.1,0.2,0.3\n")
        (tmp_path / "rec.csv.json").write_text(
            json.dumps({"sample_rate_hz": 25.0, "subject_id": "alpha"})
        )
        rec = read_recording_csv(path)
        assert rec.sample_rate_hz == 25.0
        assert rec.subject_id == "alpha"

    def test_roundtrip_via_writer(self, tmp_path):
        original = synthesize(SyntheticSpec(duration_s=30.0, noise_sd_g=0.01, seed=5))
        path = tmp_path / "roundtrip.csv"
        write_recording_csv(original, path)
        back = read_recording_csv(path)
        assert back.sample_rate_hz == original.sample_rate_hz
        np.testing.assert_array_equal(back.x, original.x)
        np.testing.assert_array_equal(back.z, original.z)


class TestBinaryFormat:
    def _recording(self, n=1000, seed=6):
        rng = np.random.default_rng(seed)
        # quantize to float32 so the round-trip is bitwise
        make = lambda: rng.normal(0, 0.5, n).astype("<f4").astype(float)
        return RawRecording("binsub", 10.0, make(), make(), make())

    def test_write_read_roundtrip_bitwise(self, tmp_path):
        rec = self._recording()
        path = tmp_path / "rec.actm"
        write_recording_bin(rec, path)
        back = read_recording_bin(path)
        assert back.sample_rate_hz == rec.sample_rate_hz
        for axis in "xyz":
            assert getattr(back, axis).tobytes() == getattr(rec, axis).tobytes()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "rec.actm"
        write_recording_bin(self._recording(10), path)
        blob = bytearray(path.read_bytes())
        blob[:4] = b"XXXX"
        path.write_bytes(bytes(blob))
        with pytest.raises(BadMagic):
            read_recording_bin(path)

    def test_unsupported_version(self, tmp_path):
        path = tmp_path / "rec.actm"
        write_recording_bin(self._recording(10), path)
        blob = bytearray(path.read_bytes())
        blob[4:6] = (99).to_bytes(2, "little")
        path.write_bytes(bytes(blob))
        with pytest.raises(VersionUnsupported):
            read_recording_bin(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "rec.actm"
        write_recording_bin(self._recording(100), path)
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) - 24])
        with pytest.raises(TruncatedPayload):
            read_recording_bin(path)

    def test_header_too_short(self, tmp_path):
        path = tmp_path / "rec.actm"
        path.write_bytes(b"ACTM\x01")
        with pytest.raises(TruncatedPayload):
            read_recording_bin(path)

    def test_cross_format_equality_within_float32(self, tmp_path):
        rec = synthesize(SyntheticSpec(duration_s=20.0, noise_sd_g=0.02, seed=8))
        write_recording_csv(rec, tmp_path / "r.csv")
        write_recording_bin(rec, tmp_path / "r.actm")
        from_csv = read_recording(tmp_path / "r.csv")
        from_bin = read_recording(tmp_path / "r.actm")
        np.testing.assert_array_equal(from_csv.x, rec.x)
        np.testing.assert_allclose(from_bin.x, rec.x, atol=6e-8, rtol=1e-7)

    def test_non_deci_hz_rate_rejected_on_write(self, tmp_path):
        rec = RawRecording("s", 10.01, [0.0], [0.0], [0.0])
        with pytest.raises(ValueError):
            write_recording_bin(rec, tmp_path / "r.actm")


class TestSynthesize:
    def test_noise_free_rest_ufm_is_exactly_1(self):
        rec = synthesize(SyntheticSpec(duration_s=60.0, rest_s=60.0, active_s=0.0))
        ufm = np.sqrt(rec.x ** 2 + rec.y ** 2 + rec.z ** 2)
        np.testing.assert_allclose(ufm, 1.0, atol=1e-12)

    def test_same_seed_identical(self):
        spec = SyntheticSpec(duration_s=120.0, noise_sd_g=0.05, amp_jitter=0.5, seed=9)
        a, b = synthesize(spec), synthesize(spec)
        for axis in "xyz":
            assert getattr(a, axis).tobytes() == getattr(b, axis).tobytes()

    def test_different_seed_differs(self):
        base = SyntheticSpec(duration_s=120.0, noise_sd_g=0.05, seed=1)
        other = SyntheticSpec(duration_s=120.0, noise_sd_g=0.05, seed=2)
        assert not np.array_equal(synthesize(base).x, synthesize(other).x)

    def test_bout_enmo_exceeds_rest_enmo(self):
        rec = synthesize(
            SyntheticSpec(
                duration_s=600.0, rest_s=300.0, active_s=300.0,
                active_amp_g=0.5, noise_sd_g=0.01, seed=10,
            )
        )
        ufm = np.sqrt(rec.x ** 2 + rec.y ** 2 + rec.z ** 2)
        rest_enmo = np.maximum(ufm[:3000] - 1, 0).mean()
        bout_enmo = np.maximum(ufm[3000:6000] - 1, 0).mean()
        assert bout_enmo > rest_enmo

    def test_non_unit_orientation_rejected(self):
        with pytest.raises(ValueError):
            SyntheticSpec(orientation=(1.0, 1.0, 0.0))

    def test_frequency_outside_band_rejected(self):
        with pytest.raises(ValueError):
            SyntheticSpec(active_freq_hz=4.0, active_s=10.0)


class TestResultFormatting:
    def test_mean_sd_cell_format(self):
        assert format_mean_sd(1.0, 0.0) == "1±0"
        assert format_mean_sd(0.98971, 0.004) == "0.98971±0"
        assert format_mean_sd(0.84771, 0.04) == "0.84771±0.04"
        assert format_mean_sd(float("nan"), 0.1) == "NA"

    def test_label_slugs_distinct_and_safe(self):
        sq = "\N{SUPERSCRIPT TWO}"
        labels = [
            "PIM(UFNM)", f"PIM(FX{sq})", f"PIM(FX){sq}",
            "SUM[ZCM,FXYZ]", f"SUM[ZCM,FXYZ{sq}]", "ENMO",
        ]
        slugs = [label_slug(l) for l in labels]
        assert len(set(slugs)) == len(slugs)
        for slug in slugs:
            assert "/" not in slug and " " not in slug and "²" not in slug
