"""Core domain types shared across the toolkit.

All types validate on construction, are immutable afterwards, and are
safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_DAMPING = 0.03


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Signal:
    """Uniformly sampled acceleration time series.

    Parameters
    ----------
    samples : array_like
        Acceleration values (g or normalized units), finite, non-empty.
    sample_rate_hz : float
        Sampling rate, > 0.  The sample period is ``1 / sample_rate_hz``.
    """

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        samples = _frozen_array(self.samples)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("signal samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(samples)):
            raise ValueError("signal samples must all be finite")
        rate = float(self.sample_rate_hz)
        if not (rate > 0.0 and np.isfinite(rate)):
            raise ValueError(f"sample_rate_hz must be positive and finite, got {rate}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", rate)

    @property
    def sample_period_s(self) -> float:
        return 1.0 / self.sample_rate_hz

    def __len__(self) -> int:
        return self.samples.size

    def scaled(self, factor: float) -> "Signal":
        return Signal(self.samples * float(factor), self.sample_rate_hz)


@dataclass(frozen=True)
class FrequencyGrid:
    """Natural frequencies of the SDOF evaluation bank plus the shared
    damping ratio (constant across all oscillators)."""

    freqs_hz: np.ndarray
    damping_ratio: float = DEFAULT_DAMPING

    def __post_init__(self):
        freqs = _frozen_array(self.freqs_hz)
        if freqs.ndim != 1 or freqs.size == 0:
            raise ValueError("freqs_hz must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(freqs)) or not np.all(freqs > 0):
            raise ValueError("freqs_hz must be finite and positive")
        if freqs.size > 1 and not np.all(np.diff(freqs) > 0):
            raise ValueError("freqs_hz must be strictly increasing")
        zeta = float(self.damping_ratio)
        if not (0.0 < zeta < 1.0):
            raise ValueError(f"damping_ratio must lie in (0, 1), got {zeta}")
        object.__setattr__(self, "freqs_hz", freqs)
        object.__setattr__(self, "damping_ratio", zeta)

    def __len__(self) -> int:
        return self.freqs_hz.size

    @property
    def f_min_hz(self) -> float:
        return float(self.freqs_hz[0])

    @property
    def f_max_hz(self) -> float:
        return float(self.freqs_hz[-1])


@dataclass(frozen=True)
class Spectrum:
    """SRS magnitudes aligned to a :class:`FrequencyGrid`."""

    values: np.ndarray
    grid: FrequencyGrid

    def __post_init__(self):
        values = _frozen_array(self.values)
        if values.shape != (len(self.grid),):
            raise ValueError(
                f"spectrum length {values.shape} does not match grid length {len(self.grid)}"
            )
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("spectrum values must be finite and non-negative")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    def scaled(self, factor: float) -> "Spectrum":
        return Spectrum(self.values * float(factor), self.grid)

    def same_grid(self, other: "Spectrum", rtol: float = 0.0) -> bool:
        a, b = self.grid, other.grid
        return (
            len(a) == len(b)
            and np.allclose(a.freqs_hz, b.freqs_hz, rtol=rtol, atol=0.0)
            and a.damping_ratio == b.damping_ratio
        )


@dataclass(frozen=True)
class SdofResponse:
    """Absolute-acceleration waveforms of the oscillator bank.

    ``absolute_accel`` has one row per evaluation frequency over the padded
    record; ``peak_index[i]`` is the argmax of ``|absolute_accel[i]|``.
    Mass is normalized to 1, so stiffness and damping per oscillator are
    implied by the natural frequency and the shared damping ratio.
    """

    absolute_accel: np.ndarray
    peak_index: np.ndarray
    grid: FrequencyGrid = field(repr=False)

    def __post_init__(self):
        accel = np.asarray(self.absolute_accel, dtype=np.float64)
        peaks = np.asarray(self.peak_index, dtype=np.int64)
        if accel.ndim != 2 or accel.shape[0] != len(self.grid):
            raise ValueError("absolute_accel must be (F, n) with F matching the grid")
        if peaks.shape != (accel.shape[0],):
            raise ValueError("peak_index must have one entry per frequency")
        accel.setflags(write=False)
        peaks.setflags(write=False)
        object.__setattr__(self, "absolute_accel", accel)
        object.__setattr__(self, "peak_index", peaks)

    @property
    def omega(self) -> np.ndarray:
        return 2.0 * np.pi * self.grid.freqs_hz

    @property
    def omega_damped(self) -> np.ndarray:
        return self.omega * np.sqrt(1.0 - self.grid.damping_ratio**2)

    def peak_values(self) -> np.ndarray:
        rows = np.arange(self.absolute_accel.shape[0])
        return np.abs(self.absolute_accel[rows, self.peak_index])
