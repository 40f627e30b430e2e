"""Reader/writer for the shock dataset container format.

Implements the published binary layout directly (this package talks to
the generator toolkit only through its file format and CLI):

    8 bytes   magic  b"SRSDATA1"
    8 bytes   little-endian uint64, manifest byte length
    manifest  UTF-8 JSON, sorted keys, compact separators
    payload   count records of little-endian float32:
              n_samples signal values followed by F spectrum values
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

MAGIC = b"SRSDATA1"
FORMAT_VERSION = 1
LOG_EPS = 1e-12


class DatasetFormatError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    f_min_hz: float
    f_max_hz: float
    count: int
    damping_ratio: float

    def freqs_hz(self) -> np.ndarray:
        freqs = np.geomspace(self.f_min_hz, self.f_max_hz, self.count)
        freqs[0] = self.f_min_hz
        freqs[-1] = self.f_max_hz
        return freqs


class ShockDataset:
    """Memory-mapped random access over records of (signal, spectrum)."""

    def __init__(self, path):
        self.path = os.fspath(path)
        with open(self.path, "rb") as fh:
            if fh.read(len(MAGIC)) != MAGIC:
                raise DatasetFormatError(f"{self.path}: bad magic")
            manifest_len = int.from_bytes(fh.read(8), "little")
            manifest = json.loads(fh.read(manifest_len).decode("utf-8"))
        if manifest.get("format_version") != FORMAT_VERSION:
            raise DatasetFormatError(
                f"{self.path}: unsupported format_version {manifest.get('format_version')}"
            )
        self.manifest = manifest
        self.count = int(manifest["count"])
        self.n_samples = int(manifest["n_samples"])
        self.sample_rate_hz = float(manifest["sample_rate_hz"])
        self.grid = GridSpec(
            float(manifest["grid_f_min_hz"]),
            float(manifest["grid_f_max_hz"]),
            int(manifest["grid_count"]),
            float(manifest["damping_ratio"]),
        )
        self.normalization = manifest.get("normalization")
        offset = len(MAGIC) + 8 + manifest_len
        record_len = self.n_samples + self.grid.count
        expected = self.count * record_len * 4
        actual = os.path.getsize(self.path) - offset
        if actual != expected:
            raise DatasetFormatError(
                f"{self.path}: payload holds {actual} bytes, manifest implies {expected}"
            )
        if self.count:
            self._payload = np.memmap(
                self.path, dtype="<f4", mode="r", offset=offset,
                shape=(self.count, record_len),
            )
        else:
            self._payload = np.empty((0, record_len), dtype="<f4")

    def __len__(self) -> int:
        return self.count

    def signal(self, index: int) -> np.ndarray:
        return np.asarray(self._payload[index, : self.n_samples], dtype=np.float64)

    def spectrum(self, index: int) -> np.ndarray:
        return np.asarray(self._payload[index, self.n_samples :], dtype=np.float64)

    def signals_matrix(self) -> np.ndarray:
        return np.asarray(self._payload[:, : self.n_samples], dtype=np.float32)

    def spectra_matrix(self) -> np.ndarray:
        return np.asarray(self._payload[:, self.n_samples :], dtype=np.float32)


def write_dataset(path, signals: np.ndarray, spectra: np.ndarray, manifest: dict) -> None:
    """Write records; manifest must carry the mandatory layout fields."""
    signals = np.asarray(signals, dtype="<f4")
    spectra = np.asarray(spectra, dtype="<f4")
    if signals.shape[0] != spectra.shape[0]:
        raise ValueError("signals and spectra must pair one-to-one")
    manifest = dict(manifest)
    manifest.setdefault("format_version", FORMAT_VERSION)
    manifest["count"] = int(signals.shape[0])
    manifest["n_samples"] = int(signals.shape[1])
    manifest["grid_count"] = int(spectra.shape[1])
    payload = np.concatenate([signals, spectra], axis=1)
    manifest_bytes = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(len(manifest_bytes).to_bytes(8, "little"))
        fh.write(manifest_bytes)
        fh.write(payload.astype("<f4").tobytes())


def encode_condition(spectrum: np.ndarray, freqs_hz: np.ndarray) -> np.ndarray:
    """log10 of the spectrum reweighted by its natural frequencies."""
    return np.log10(np.maximum(spectrum * freqs_hz, LOG_EPS))


def normalize_by_spectrum_max(signal: Optional[np.ndarray], spectrum: np.ndarray):
    """Max-norm convention shared with the generator toolkit."""
    scale = float(np.max(spectrum))
    if scale <= 0:
        raise ValueError("cannot normalize an all-zero spectrum")
    normalized_signal = None if signal is None else signal / scale
    return normalized_signal, spectrum / scale, scale
