"""On-disk dataset format, normalization, and the spectrum conditioning
encoding.

A dataset file is a single binary container::

    8 bytes   magic  b"SRSDATA1"
    8 bytes   little-endian uint64, manifest byte length
    manifest  UTF-8 JSON (sorted keys, compact separators)
    payload   count records of little-endian float32:
              n_samples signal values followed by F spectrum values

Payload is 32-bit for footprint; all computation is double precision.
Writers are byte-deterministic for identical inputs, which makes file
digests usable as regression checks.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import asdict, dataclass
from typing import Iterable, Iterator, Optional

import numpy as np

from .srs import log_frequency_grid
from .types import FrequencyGrid, Signal, Spectrum

MAGIC = b"SRSDATA1"
FORMAT_VERSION = 1
LOG_EPS = 1e-12


class DatasetFormatError(ValueError):
    """Malformed manifest, truncated payload, or version mismatch."""


@dataclass(frozen=True)
class EncodedCondition:
    """Frequency-reweighted log-magnitude encoding of a spectrum."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if not np.all(np.isfinite(values)):
            raise ValueError("encoded condition must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class DatasetManifest:
    count: int
    n_samples: int
    sample_rate_hz: float
    grid_f_min_hz: float
    grid_f_max_hz: float
    grid_count: int
    damping_ratio: float
    noise_var: Optional[float] = None
    seed: Optional[int] = None
    generator_params: Optional[dict] = None
    normalization: Optional[list] = None
    pad_scale: Optional[float] = None
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("count must be >= 0")
        if self.normalization is not None and len(self.normalization) != self.count:
            raise ValueError("normalization must hold one scale per record")

    def grid(self) -> FrequencyGrid:
        return log_frequency_grid(
            self.grid_f_min_hz, self.grid_f_max_hz, self.grid_count, self.damping_ratio
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "DatasetManifest":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(f"manifest is not valid JSON: {exc}") from exc
        if "format_version" not in raw:
            raise DatasetFormatError("manifest missing format_version")
        if raw["format_version"] != FORMAT_VERSION:
            raise DatasetFormatError(
                f"unsupported format_version {raw['format_version']}, expected {FORMAT_VERSION}"
            )
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise DatasetFormatError(f"unknown manifest fields: {sorted(unknown)}")
        missing = {"count", "n_samples", "sample_rate_hz", "grid_f_min_hz",
                   "grid_f_max_hz", "grid_count", "damping_ratio"} - set(raw)
        if missing:
            raise DatasetFormatError(f"manifest missing fields: {sorted(missing)}")
        return cls(**raw)


def normalize_pair(signal: Signal, spectrum: Spectrum):
    """Max-norm a (signal, spectrum) pair by the spectrum peak.

    Returns (signal / scale, spectrum / scale, scale) with the normalized
    spectrum maximum exactly 1.  The signal shares the factor so the
    linear relation between waveform and spectrum is preserved.
    """
    scale = float(np.max(spectrum.values))
    if scale <= 0.0:
        raise ValueError("cannot normalize an all-zero spectrum")
    return (
        Signal(signal.samples / scale, signal.sample_rate_hz),
        Spectrum(spectrum.values / scale, spectrum.grid),
        scale,
    )


def denormalize_signal(signal: Signal, scale: float) -> Signal:
    """Undo :func:`normalize_pair` on a signal."""
    if scale <= 0.0:
        raise ValueError("scale must be positive")
    return Signal(signal.samples * scale, signal.sample_rate_hz)


def encode_condition(spectrum: Spectrum) -> EncodedCondition:
    """log10 of the spectrum reweighted by its natural frequencies."""
    product = spectrum.values * spectrum.grid.freqs_hz
    return EncodedCondition(np.log10(np.maximum(product, LOG_EPS)))


class ShockDataset:
    """Streaming random-access reader over a dataset file.

    Safe for concurrent readers over non-overlapping record ranges; the
    payload is memory-mapped read-only.
    """

    def __init__(self, path, manifest: DatasetManifest, payload_offset: int):
        self.path = os.fspath(path)
        self.manifest = manifest
        self._payload_offset = payload_offset
        self._record_len = manifest.n_samples + manifest.grid_count
        self._grid = manifest.grid()
        if manifest.count:
            self._payload = np.memmap(
                self.path,
                dtype="<f4",
                mode="r",
                offset=payload_offset,
                shape=(manifest.count, self._record_len),
            )
        else:
            self._payload = np.empty((0, self._record_len), dtype="<f4")

    @classmethod
    def open(cls, path) -> "ShockDataset":
        path = os.fspath(path)
        with open(path, "rb") as fh:
            magic = fh.read(len(MAGIC))
            if magic != MAGIC:
                raise DatasetFormatError(f"{path}: bad magic {magic!r}")
            raw_len = fh.read(8)
            if len(raw_len) != 8:
                raise DatasetFormatError(f"{path}: truncated header")
            manifest_len = int.from_bytes(raw_len, "little")
            manifest_bytes = fh.read(manifest_len)
            if len(manifest_bytes) != manifest_len:
                raise DatasetFormatError(f"{path}: truncated manifest")
            manifest = DatasetManifest.from_json(manifest_bytes.decode("utf-8"))
            payload_offset = len(MAGIC) + 8 + manifest_len
        expected = manifest.count * (manifest.n_samples + manifest.grid_count) * 4
        actual = os.path.getsize(path) - payload_offset
        if actual != expected:
            raise DatasetFormatError(
                f"{path}: payload holds {actual} bytes, manifest implies {expected}"
            )
        return cls(path, manifest, payload_offset)

    @property
    def grid(self) -> FrequencyGrid:
        return self._grid

    def __len__(self) -> int:
        return self.manifest.count

    def record(self, index: int):
        """(Signal, Spectrum) at `index`, promoted to float64."""
        row = np.asarray(self._payload[index], dtype=np.float64)
        signal = Signal(row[: self.manifest.n_samples], self.manifest.sample_rate_hz)
        spectrum = Spectrum(row[self.manifest.n_samples :], self._grid)
        return signal, spectrum

    def signal(self, index: int) -> Signal:
        row = self._payload[index, : self.manifest.n_samples]
        return Signal(np.asarray(row, dtype=np.float64), self.manifest.sample_rate_hz)

    def spectrum(self, index: int) -> Spectrum:
        row = self._payload[index, self.manifest.n_samples :]
        return Spectrum(np.asarray(row, dtype=np.float64), self._grid)

    def __iter__(self) -> Iterator:
        for i in range(len(self)):
            yield self.record(i)

    def spectra_matrix(self) -> np.ndarray:
        """All spectra as a (count, F) float64 matrix."""
        return np.asarray(self._payload[:, self.manifest.n_samples :], dtype=np.float64)


def write_dataset(path, records: Iterable, manifest) -> None:
    """Write records in order; byte-deterministic for identical inputs.

    `records` yields (Signal, Spectrum) pairs.  `manifest` is either a
    :class:`DatasetManifest` or a zero-argument callable producing one; the
    callable form is evaluated after the records are consumed, for writers
    that accumulate per-record manifest data (normalization scales).  The
    payload streams to a temporary file first because the header precedes
    it in the final file.
    """
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path)) or "."
    n_written = 0
    fd, tmp_payload = tempfile.mkstemp(dir=directory, suffix=".payload.tmp")
    try:
        n_samples = None
        with os.fdopen(fd, "wb") as payload_fh:
            for signal, spectrum in records:
                if n_samples is None:
                    n_samples = len(signal)
                if len(signal) != n_samples:
                    raise ValueError(
                        f"record {n_written}: signal length {len(signal)} != {n_samples}"
                    )
                row = np.empty(len(signal) + len(spectrum), dtype="<f4")
                row[: len(signal)] = signal.samples
                row[len(signal) :] = spectrum.values
                payload_fh.write(row.tobytes())
                n_written += 1
        if callable(manifest):
            manifest = manifest()
        if n_written != manifest.count:
            raise ValueError(
                f"writer received {n_written} records, manifest says {manifest.count}"
            )
        if n_written and n_samples != manifest.n_samples:
            raise ValueError(
                f"record signal length {n_samples} != manifest n_samples {manifest.n_samples}"
            )
        manifest_bytes = manifest.to_json().encode("utf-8")
        with open(path, "wb") as out:
            out.write(MAGIC)
            out.write(len(manifest_bytes).to_bytes(8, "little"))
            out.write(manifest_bytes)
            with open(tmp_payload, "rb") as payload_fh:
                while True:
                    chunk = payload_fh.read(1 << 20)
                    if not chunk:
                        break
                    out.write(chunk)
    finally:
        if os.path.exists(tmp_payload):
            os.remove(tmp_payload)


def read_dataset(path) -> ShockDataset:
    """Open a dataset file for streaming reads."""
    return ShockDataset.open(path)


def export_spectra_csv(dataset: ShockDataset, path) -> None:
    """Dump every stored spectrum as (record, freq_hz, value) rows."""
    freqs = dataset.grid.freqs_hz
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("record,freq_hz,value\n")
        for i in range(len(dataset)):
            values = dataset.spectrum(i).values
            for f, v in zip(freqs, values):
                fh.write(f"{i},{float(f)!r},{float(v)!r}\n")
