import hashlib
import json

import numpy as np
import pytest

from srskit import (
    DatasetFormatError,
    DatasetManifest,
    Signal,
    denormalize_signal,
    encode_condition,
    export_spectra_csv,
    generate_dataset,
    generate_shock,
    log_frequency_grid,
    normalize_pair,
    read_dataset,
    srs_filterbank,
    write_dataset,
)
from srskit.dataset import MAGIC


@pytest.fixture
def pair(small_params, small_grid):
    sig, _ = generate_shock(small_params, 0)
    return sig, srs_filterbank(sig, small_grid)


class TestNormalizePair:
    def test_scale_is_spectrum_max(self, pair):
        sig, spec = pair
        norm_sig, norm_spec, scale = normalize_pair(sig, spec)
        assert scale == spec.values.max()
        assert norm_spec.values.max() == 1.0
        np.testing.assert_array_equal(norm_sig.samples, sig.samples / scale)

    def test_already_normalized_identity(self, pair):
        sig, spec = pair
        n_sig, n_spec, scale = normalize_pair(sig, spec)
        again_sig, again_spec, again_scale = normalize_pair(n_sig, n_spec)
        assert again_scale == 1.0
        np.testing.assert_array_equal(again_sig.samples, n_sig.samples)

    def test_round_trip(self, pair):
        sig, spec = pair
        n_sig, _, scale = normalize_pair(sig, spec)
        back = denormalize_signal(n_sig, scale)
        np.testing.assert_allclose(back.samples, sig.samples, rtol=1e-12)

    def test_zero_spectrum_rejected(self, small_grid):
        sig = Signal(np.zeros(64), 8192.0)
        spec = srs_filterbank(sig, small_grid)
        with pytest.raises(ValueError):
            normalize_pair(sig, spec)


class TestDenormalize:
    def test_unit_scale_identity(self, pair):
        sig, _ = pair
        np.testing.assert_array_equal(denormalize_signal(sig, 1.0).samples, sig.samples)

    def test_srs_homogeneity_through_denormalize(self, pair, small_grid):
        sig, spec = pair
        n_sig, n_spec, scale = normalize_pair(sig, spec)
        srs_denorm = srs_filterbank(denormalize_signal(n_sig, scale), small_grid)
        srs_norm = srs_filterbank(n_sig, small_grid)
        np.testing.assert_allclose(srs_denorm.values, scale * srs_norm.values, rtol=1e-12)

    def test_rejects_bad_scale(self, pair):
        with pytest.raises(ValueError):
            denormalize_signal(pair[0], 0.0)


class TestEncodeCondition:
    def test_unit_value_at_ten_hz(self):
        grid = log_frequency_grid(10, 4096, 2)
        from srskit import Spectrum

        spec = Spectrum(np.array([1.0, 1.0]), grid)
        enc = encode_condition(spec)
        assert enc.values[0] == pytest.approx(1.0)

    def test_reweighting(self):
        grid = log_frequency_grid(100, 4096, 2)
        from srskit import Spectrum

        spec = Spectrum(np.array([0.1, 1.0]), grid)
        enc = encode_condition(spec)
        assert enc.values[0] == pytest.approx(1.0)
        assert enc.values[1] == pytest.approx(np.log10(4096.0), abs=1e-4)

    def test_zero_value_floored_finite(self):
        grid = log_frequency_grid(10, 4096, 3)
        from srskit import Spectrum

        spec = Spectrum(np.array([0.0, 1.0, 2.0]), grid)
        enc = encode_condition(spec)
        assert np.all(np.isfinite(enc.values))
        assert enc.values[0] == pytest.approx(-12.0)


def _manifest_for(grid, count, n_samples, fs, **extra):
    return DatasetManifest(
        count=count,
        n_samples=n_samples,
        sample_rate_hz=fs,
        grid_f_min_hz=grid.f_min_hz,
        grid_f_max_hz=grid.f_max_hz,
        grid_count=len(grid),
        damping_ratio=grid.damping_ratio,
        **extra,
    )


class TestReadWrite:
    def test_write_read_round_trip(self, small_params, small_grid, tmp_path):
        records = []
        for k in range(10):
            sig, _ = generate_shock(small_params, k)
            records.append((sig, srs_filterbank(sig, small_grid)))
        path = tmp_path / "roundtrip.srs"
        manifest = _manifest_for(
            small_grid, 10, small_params.n_samples, small_params.sample_rate_hz
        )
        write_dataset(path, iter(records), manifest)
        ds = read_dataset(path)
        assert len(ds) == 10
        for k, (sig, spec) in enumerate(records):
            stored_sig, stored_spec = ds.record(k)
            np.testing.assert_array_equal(
                stored_sig.samples, sig.samples.astype(np.float32).astype(np.float64)
            )
            np.testing.assert_array_equal(
                stored_spec.values, spec.values.astype(np.float32).astype(np.float64)
            )

    def test_truncated_payload_detected(self, small_params, small_grid, tmp_path):
        path = tmp_path / "trunc.srs"
        generate_dataset(small_params, 3, small_grid, path)
        data = path.read_bytes()
        path.write_bytes(data[:-4])
        with pytest.raises(DatasetFormatError, match="payload"):
            read_dataset(path)

    def test_bad_magic_detected(self, tmp_path):
        path = tmp_path / "bad.srs"
        path.write_bytes(b"NOTMAGIC" + b"\x00" * 64)
        with pytest.raises(DatasetFormatError, match="magic"):
            read_dataset(path)

    def test_version_mismatch_detected(self, small_params, small_grid, tmp_path):
        path = tmp_path / "vers.srs"
        generate_dataset(small_params, 2, small_grid, path)
        raw = path.read_bytes()
        mlen = int.from_bytes(raw[8:16], "little")
        manifest = json.loads(raw[16 : 16 + mlen])
        manifest["format_version"] = 2
        new_manifest = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode()
        path.write_bytes(
            MAGIC + len(new_manifest).to_bytes(8, "little") + new_manifest + raw[16 + mlen :]
        )
        with pytest.raises(DatasetFormatError, match="format_version"):
            read_dataset(path)

    def test_deterministic_digests(self, small_params, small_grid, tmp_path):
        p1, p2 = tmp_path / "one.srs", tmp_path / "two.srs"
        for p in (p1, p2):
            generate_dataset(small_params, 4, small_grid, p)
        assert hashlib.sha256(p1.read_bytes()).hexdigest() == hashlib.sha256(
            p2.read_bytes()
        ).hexdigest()

    def test_count_mismatch_rejected(self, small_params, small_grid, tmp_path):
        sig, _ = generate_shock(small_params, 0)
        records = [(sig, srs_filterbank(sig, small_grid))]
        manifest = _manifest_for(
            small_grid, 5, small_params.n_samples, small_params.sample_rate_hz
        )
        with pytest.raises(ValueError, match="manifest says"):
            write_dataset(tmp_path / "x.srs", iter(records), manifest)


class TestDatasetInvariants:
    def test_stored_spectra_pair_with_signals(self, small_params, small_grid, tmp_path):
        # guards against signal/spectrum misalignment through the f32 round trip
        ds = generate_dataset(small_params, 20, small_grid, tmp_path / "pair.srs")
        worst = 0.0
        for k in range(len(ds)):
            sig, spec = ds.record(k)
            recomputed = srs_filterbank(sig, small_grid)
            worst = max(
                worst, np.max(np.abs(recomputed.values - spec.values) / recomputed.values)
            )
        assert worst < 1e-5

    def test_normalized_dataset_max_one(self, small_params, small_grid, tmp_path):
        ds = generate_dataset(
            small_params, 15, small_grid, tmp_path / "norm.srs", normalize=True
        )
        assert ds.manifest.normalization is not None
        assert len(ds.manifest.normalization) == 15
        for k in range(len(ds)):
            _, spec = ds.record(k)
            assert abs(spec.values.max() - 1.0) < 1e-6


class TestExportCsv:
    def test_csv_layout(self, small_params, small_grid, tmp_path):
        ds = generate_dataset(small_params, 2, small_grid, tmp_path / "d.srs")
        out = tmp_path / "spectra.csv"
        export_spectra_csv(ds, out)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "record,freq_hz,value"
        assert len(lines) == 1 + 2 * len(small_grid)
        first = lines[1].split(",")
        assert int(first[0]) == 0
        assert float(first[1]) == pytest.approx(small_grid.f_min_hz)
