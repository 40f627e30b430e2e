"""Reproducible synthetic shock generator.

Each shock is a sum of randomly drawn basis atoms (decayed sinusoids and
Morlet-like pulses by default) placed at random offsets, plus stationary
Gaussian background noise.  Randomness comes from the counter-based
Philox generator keyed per (dataset seed, stream index), so generation is
order-independent: shock k is the same whether generated alone, in
sequence, or in parallel.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterator

import numpy as np
from scipy.signal import sawtooth as _sawtooth_wave

from .srs import DEFAULT_PAD_SCALE, srs_filterbank
from .types import FrequencyGrid, Signal

BASIS_KINDS = ("decayed_sine", "morlet_pulse", "rbf", "sawtooth")
EXPERIMENTAL_KINDS = frozenset({"rbf", "sawtooth"})

# Reserved Philox stream for dataset-level draws (the noise variance).
_NOISE_STREAM = np.uint64(2**64 - 1)


def _check_range(name, rng_pair, lo_ok=None):
    lo, hi = float(rng_pair[0]), float(rng_pair[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
        raise ValueError(f"{name} must be a finite (lower, upper) pair with lower <= upper")
    if lo_ok is not None and lo < lo_ok:
        raise ValueError(f"{name} lower bound must be >= {lo_ok}")
    return (lo, hi)


@dataclass(frozen=True)
class GenParams:
    """Sampling rules for the synthetic shock generator.

    ``decay_factor_range`` holds multipliers of the drawn atom frequency:
    the sinusoid decay is ``lambda = f * U(lo, hi)``, matching a decay
    range expressed as U(0.004*pi*f, 0.2*pi*f).
    """

    n_basis_range: tuple = (1, 10)
    amplitude_range: tuple = (0.25, 10.0)
    phase_range: tuple = (0.0, 2.0 * math.pi)
    freq_range_hz: tuple = (10.0, 4096.0)
    decay_factor_range: tuple = (0.004 * math.pi, 0.2 * math.pi)
    wavelet_eta_range: tuple = (0.01, 10.0)
    offset_fraction_range: tuple = (0.0, 0.75)
    adoption_prob: float = 0.5
    noise_var_range: tuple = (0.005, 0.05)
    basis_kinds: tuple = ("decayed_sine", "morlet_pulse")
    n_samples: int = 9000
    sample_rate_hz: float = 32768.0
    seed: int = 0

    def __post_init__(self):
        lo, hi = int(self.n_basis_range[0]), int(self.n_basis_range[1])
        if lo < 1 or lo > hi:
            raise ValueError("n_basis_range must satisfy 1 <= lower <= upper")
        object.__setattr__(self, "n_basis_range", (lo, hi))
        for name, lo_ok in (
            ("amplitude_range", 0.0),
            ("phase_range", None),
            ("freq_range_hz", 0.0),
            ("decay_factor_range", 0.0),
            ("wavelet_eta_range", 0.0),
            ("noise_var_range", 0.0),
        ):
            object.__setattr__(self, name, _check_range(name, getattr(self, name), lo_ok))
        off = _check_range("offset_fraction_range", self.offset_fraction_range, 0.0)
        if off[1] >= 1.0:
            raise ValueError("offset_fraction_range upper bound must be < 1")
        object.__setattr__(self, "offset_fraction_range", off)
        if not (0.0 <= self.adoption_prob <= 1.0):
            raise ValueError("adoption_prob must lie in [0, 1]")
        kinds = tuple(self.basis_kinds)
        if not kinds:
            raise ValueError("basis_kinds must be non-empty")
        for k in kinds:
            if k not in BASIS_KINDS:
                raise ValueError(f"unknown basis kind {k!r}; choose from {BASIS_KINDS}")
        object.__setattr__(self, "basis_kinds", kinds)
        if self.n_samples < 2:
            raise ValueError("n_samples must be >= 2")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "seed", int(self.seed))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GenParams":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown GenParams fields: {sorted(unknown)}")
        kwargs = dict(d)
        for key, val in kwargs.items():
            if isinstance(val, list):
                kwargs[key] = tuple(val)
        return cls(**kwargs)


@dataclass(frozen=True)
class BasisAtom:
    """One randomly placed basis function within a shock."""

    kind: str
    amplitude: float
    freq_hz: float
    phase: float
    decay: float
    offset_index: int

    def __post_init__(self):
        if self.kind not in BASIS_KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.offset_index < 0:
            raise ValueError("offset_index must be >= 0")


def render_atom(atom: BasisAtom, n_samples: int, sample_rate_hz: float) -> Signal:
    """Evaluate one atom over n_samples; zero before its offset index.

    Local time runs from the offset: n' = n - offset_index.
    """
    if not (0 <= atom.offset_index < n_samples):
        raise ValueError(
            f"offset_index {atom.offset_index} outside [0, {n_samples})"
        )
    ts = 1.0 / sample_rate_hz
    out = np.zeros(n_samples)
    t_local = np.arange(n_samples - atom.offset_index) * ts
    a, f, phi = atom.amplitude, atom.freq_hz, atom.phase
    if atom.kind == "decayed_sine":
        vals = a * np.exp(-atom.decay * t_local) * np.sin(2.0 * np.pi * f * t_local + phi)
    elif atom.kind == "morlet_pulse":
        w = 2.0 * np.pi * f
        vals = a * np.exp(atom.decay * w * (np.log1p(t_local) - t_local)) * np.cos(
            w * t_local + phi
        )
    elif atom.kind == "rbf":
        vals = a * np.exp(-0.5 * (t_local * f) ** 2) * np.cos(2.0 * np.pi * f * t_local + phi)
    elif atom.kind == "sawtooth":
        vals = a * np.exp(-atom.decay * t_local) * _sawtooth_wave(
            2.0 * np.pi * f * t_local + phi
        )
    else:  # pragma: no cover - guarded by BasisAtom
        raise ValueError(atom.kind)
    out[atom.offset_index :] = vals
    return Signal(out, sample_rate_hz)


def _shock_rng(seed: int, stream) -> np.random.Generator:
    key = np.array([np.uint64(seed & (2**64 - 1)), np.uint64(stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def draw_noise_variance(params: GenParams) -> float:
    """Dataset-level noise variance: drawn once per dataset seed."""
    rng = _shock_rng(params.seed, _NOISE_STREAM)
    return float(rng.uniform(*params.noise_var_range))


def generate_shock(params: GenParams, stream_index: int):
    """One synthetic shock plus its provenance record.

    Deterministic in (params.seed, stream_index); the noise variance is a
    dataset-level draw shared by every stream of the same seed.
    """
    if stream_index < 0:
        raise ValueError("stream_index must be >= 0")
    rng = _shock_rng(params.seed, np.uint64(stream_index))
    noise_var = draw_noise_variance(params)

    n_atoms = int(rng.integers(params.n_basis_range[0], params.n_basis_range[1], endpoint=True))
    atoms = []
    prev_xi = None
    for i in range(n_atoms):
        kind = params.basis_kinds[int(rng.integers(0, len(params.basis_kinds)))]
        amplitude = float(rng.uniform(*params.amplitude_range))
        freq_hz = float(rng.uniform(*params.freq_range_hz))
        if kind in ("decayed_sine", "sawtooth"):
            decay = freq_hz * float(rng.uniform(*params.decay_factor_range))
        elif kind == "morlet_pulse":
            decay = float(rng.uniform(*params.wavelet_eta_range))
        else:
            decay = 0.0
        phase = float(rng.uniform(*params.phase_range))
        if i > 0 and float(rng.random()) < params.adoption_prob:
            xi = prev_xi
        else:
            xi = float(rng.uniform(*params.offset_fraction_range))
        prev_xi = xi
        atoms.append(
            (
                BasisAtom(
                    kind=kind,
                    amplitude=amplitude,
                    freq_hz=freq_hz,
                    phase=phase,
                    decay=decay,
                    offset_index=int(math.ceil(xi * params.n_samples)),
                ),
                xi,
            )
        )

    total = np.zeros(params.n_samples)
    for atom, _ in atoms:
        total += render_atom(atom, params.n_samples, params.sample_rate_hz).samples
    total += rng.normal(0.0, math.sqrt(noise_var), params.n_samples)

    provenance = {
        "stream_index": int(stream_index),
        "seed": params.seed,
        "n_atoms": n_atoms,
        "noise_var": noise_var,
        "atoms": [
            {
                "kind": a.kind,
                "amplitude": a.amplitude,
                "freq_hz": a.freq_hz,
                "phase": a.phase,
                "decay": a.decay,
                "offset_fraction": xi,
                "offset_index": a.offset_index,
            }
            for a, xi in atoms
        ],
    }
    return Signal(total, params.sample_rate_hz), provenance


def iter_shocks(params: GenParams, count: int, start: int = 0) -> Iterator:
    for k in range(start, start + count):
        yield generate_shock(params, k)


def generate_dataset(
    params: GenParams,
    count: int,
    grid: FrequencyGrid,
    path,
    scale_p: float = DEFAULT_PAD_SCALE,
    normalize: bool = False,
):
    """Generate `count` (signal, spectrum) records and write them to `path`.

    Spectra come from the recursive filter bank on `grid`.  Returns the
    opened dataset.  Byte-deterministic for a fixed (params, count, grid).
    """
    from .dataset import DatasetManifest, ShockDataset, normalize_pair, write_dataset

    if count < 1:
        raise ValueError("count must be >= 1")
    noise_var = draw_noise_variance(params)
    generator_params = params.to_dict()
    experimental = sorted(set(params.basis_kinds) & EXPERIMENTAL_KINDS)
    if experimental:
        generator_params["experimental_basis_kinds"] = experimental

    scales = [] if normalize else None

    def records():
        for k in range(count):
            signal, _ = generate_shock(params, k)
            spectrum = srs_filterbank(signal, grid, scale_p)
            if normalize:
                signal, spectrum, scale = normalize_pair(signal, spectrum)
                scales.append(scale)
            yield signal, spectrum

    def manifest() -> DatasetManifest:
        return DatasetManifest(
            count=count,
            n_samples=params.n_samples,
            sample_rate_hz=params.sample_rate_hz,
            grid_f_min_hz=grid.f_min_hz,
            grid_f_max_hz=grid.f_max_hz,
            grid_count=len(grid),
            damping_ratio=grid.damping_ratio,
            noise_var=noise_var,
            seed=params.seed,
            generator_params=generator_params,
            normalization=scales,
            pad_scale=scale_p,
        )

    write_dataset(path, records(), manifest)
    return ShockDataset.open(path)
