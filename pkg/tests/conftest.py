import numpy as np
import pytest

from srskit import GenParams, Signal, log_frequency_grid

# Reduced-size generator settings for fast tests: 2048 samples at 8192 Hz
# with the grid capped at fs/8, mirroring the full-scale configuration.
SMALL_FS = 8192.0
SMALL_N = 2048


@pytest.fixture
def small_params():
    return GenParams(
        freq_range_hz=(10.0, 1024.0),
        n_samples=SMALL_N,
        sample_rate_hz=SMALL_FS,
        seed=20240601,
    )


@pytest.fixture
def small_grid():
    return log_frequency_grid(10.0, SMALL_FS / 8.0, 40)


@pytest.fixture
def default_grid():
    return log_frequency_grid(10.0, 4096.0, 100)


@pytest.fixture
def rng():
    return np.random.default_rng(987654321)


def half_sine_signal(duration_s=0.011, fs=32768.0, amplitude=1.0, tail=1000):
    t = np.arange(int(round(duration_s * fs))) / fs
    pulse = amplitude * np.sin(np.pi * t / duration_s)
    return Signal(np.concatenate([pulse, np.zeros(tail)]), fs)
