"""Forward shock-response-spectrum operator.

A bank of base-excited SDOF oscillators (mass normalized to 1, damping
ratio constant across the bank) maps an acceleration time series to its
maximax spectrum: the maximum absolute acceleration response per natural
frequency, taken over the zero-padded record.

Two realizations are provided.  ``srs_filterbank`` is the fast path: the
ramp-invariant second-order recursive filter per oscillator, coefficients
per ISO 18431-4.  ``srs_analytical`` evaluates the damped-sine
convolution integral of the relative displacement directly and
differentiates numerically; it is deliberately slow and exists as an
independent oracle for the filter path.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import fftconvolve

from ._kernels import filterbank_peaks, filterbank_responses, sdof_absacc_coeffs
from .types import DEFAULT_DAMPING, FrequencyGrid, SdofResponse, Signal, Spectrum

DEFAULT_PAD_SCALE = 3.0


def padding_length(
    sample_rate_hz: float,
    f_min_hz: float,
    damping_ratio: float,
    scale_p: float = DEFAULT_PAD_SCALE,
) -> int:
    """Trailing zero-pad length for maximax capture, scaled by ``scale_p``.

    The full length covers half a cycle of the minimum natural frequency at
    the damped period; a scale factor p >= 1 shortens it to ceil(L / p).
    """
    if not (0.0 < damping_ratio < 1.0):
        raise ValueError(f"damping_ratio must lie in (0, 1), got {damping_ratio}")
    if sample_rate_hz <= 0 or f_min_hz <= 0:
        raise ValueError("sample_rate_hz and f_min_hz must be positive")
    if scale_p < 1.0:
        raise ValueError(f"scale_p must be >= 1, got {scale_p}")
    full = math.ceil(sample_rate_hz / (2.0 * f_min_hz * math.sqrt(1.0 - damping_ratio**2)))
    return int(math.ceil(full / scale_p))


def sampling_error_bound(sample_rate_hz: float, f_max_hz: float) -> float:
    """Worst-case percent error of the sampled peak of an undamped sinusoid.

    The true oscillator peak can fall between sample instants; for a
    rate-to-frequency ratio S_f = fs / f_max the bound is
    100 * (1 - cos(pi / S_f)).
    """
    if f_max_hz <= 0 or sample_rate_hz <= 0:
        raise ValueError("sample_rate_hz and f_max_hz must be positive")
    return 100.0 * (1.0 - math.cos(math.pi * f_max_hz / sample_rate_hz))


def log_frequency_grid(
    f_min_hz: float,
    f_max_hz: float,
    count: int,
    damping_ratio: float = DEFAULT_DAMPING,
) -> FrequencyGrid:
    """Geometric progression of evaluation frequencies, endpoints exact."""
    if count < 2:
        raise ValueError(f"count must be >= 2, got {count}")
    if not (0 < f_min_hz < f_max_hz):
        raise ValueError(
            f"need 0 < f_min_hz < f_max_hz, got ({f_min_hz}, {f_max_hz})"
        )
    freqs = np.geomspace(f_min_hz, f_max_hz, count)
    freqs[0] = f_min_hz
    freqs[-1] = f_max_hz
    return FrequencyGrid(freqs, damping_ratio)


def _check_nyquist(signal: Signal, grid: FrequencyGrid) -> None:
    if grid.f_max_hz > signal.sample_rate_hz / 2.0:
        raise ValueError(
            f"grid max frequency {grid.f_max_hz} Hz exceeds Nyquist "
            f"{signal.sample_rate_hz / 2.0} Hz"
        )


def srs_filterbank(
    signal: Signal, grid: FrequencyGrid, scale_p: float = DEFAULT_PAD_SCALE
) -> Spectrum:
    """Maximax SRS via the ramp-invariant recursive filter bank."""
    _check_nyquist(signal, grid)
    pad = padding_length(signal.sample_rate_hz, grid.f_min_hz, grid.damping_ratio, scale_p)
    coeffs = sdof_absacc_coeffs(grid.freqs_hz, grid.damping_ratio, signal.sample_rate_hz)
    peaks = filterbank_peaks(signal.samples, pad, coeffs)
    return Spectrum(peaks, grid)


def sdof_responses(
    signal: Signal, grid: FrequencyGrid, scale_p: float = DEFAULT_PAD_SCALE
) -> SdofResponse:
    """Full absolute-acceleration waveform per oscillator, with peak indices."""
    _check_nyquist(signal, grid)
    pad = padding_length(signal.sample_rate_hz, grid.f_min_hz, grid.damping_ratio, scale_p)
    coeffs = sdof_absacc_coeffs(grid.freqs_hz, grid.damping_ratio, signal.sample_rate_hz)
    resp = filterbank_responses(signal.samples, pad, coeffs)
    peak_index = np.argmax(np.abs(resp), axis=1)
    return SdofResponse(resp, peak_index, grid)


def srs_analytical(
    signal: Signal, grid: FrequencyGrid, scale_p: float = DEFAULT_PAD_SCALE
) -> Spectrum:
    """Maximax SRS via the convolution solution of the SDOF equation.

    The relative displacement is the quadrature of the Duhamel integral on
    the sample grid: z[n] = -(Ts/wd) * sum_m x[m] g[(n-m)Ts] with the
    damped-sine kernel g(u) = exp(-zeta*w*u) sin(wd*u).  The kernel
    vanishes at lag zero, so the upper quadrature endpoint drops out; the
    leading input sample enters at full weight because halving it (the
    textbook trapezoid endpoint) breaks the zero-initial-condition
    identity  zdd(0) = -xdd(0)  and injects an x[0]/2 artifact into the
    first output sample, which would dominate weak low-frequency peaks.

    The relative acceleration follows by second-order central differences
    (z[-1] = 0 by causality; the convolution is extended one sample past
    the padded record so the central stencil covers every retained
    sample), and the absolute acceleration adds the input back.  Slow
    reference path, independent of the recursive-filter coefficients.
    """
    _check_nyquist(signal, grid)
    ts = signal.sample_period_s
    zeta = grid.damping_ratio
    pad = padding_length(signal.sample_rate_hz, grid.f_min_hz, zeta, scale_p)
    padded = np.concatenate([signal.samples, np.zeros(pad)])
    n_total = padded.size
    n_ext = n_total + 1
    extended = np.concatenate([padded, [0.0]])
    t = np.arange(n_ext) * ts

    peaks = np.empty(len(grid))
    for i, f_n in enumerate(grid.freqs_hz):
        wn = 2.0 * np.pi * f_n
        wd = wn * math.sqrt(1.0 - zeta**2)
        kernel = np.exp(-zeta * wn * t) * np.sin(wd * t)
        z = -(ts / wd) * fftconvolve(extended, kernel)[:n_ext]
        zdd = np.empty(n_total)
        zdd[1:] = (z[2:] - 2.0 * z[1:-1] + z[:-2]) / ts**2
        zdd[0] = (z[1] - 2.0 * z[0]) / ts**2
        ydd = zdd + padded
        peaks[i] = np.max(np.abs(ydd))
    return Spectrum(peaks, grid)
