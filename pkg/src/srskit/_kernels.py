"""Hot numeric kernels.

The inner loops (second-order SDOF filter recursions and decayed-sinusoid
rendering) dominate runtime, so each kernel exists twice: a numba
``@njit`` version and a NumPy/SciPy fallback.  The active path is chosen
at import time; setting the environment variable ``SRSKIT_NO_NUMBA=1``
forces the fallback, as does an unavailable numba.  ``srskit bench``
compares both paths.

Per-frequency results are independent of the numba thread count, so
spectra are bit-identical across runs and across ``--threads`` settings
on a given backend.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.signal import lfilter


def _env_disables_numba() -> bool:
    return os.environ.get("SRSKIT_NO_NUMBA", "0").strip().lower() not in ("", "0", "false")


NUMBA_ENABLED = False
if not _env_disables_numba():
    try:
        # workqueue is always available and keeps per-frequency results
        # independent of scheduling; the default TBB probe warns on old TBB.
        os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")
        from numba import njit, prange

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False


def active_backend() -> str:
    """Name of the kernel path in use: ``"numba"`` or ``"numpy"``."""
    return "numba" if NUMBA_ENABLED else "numpy"


def sdof_absacc_coeffs(freqs_hz, damping_ratio, sample_rate_hz):
    """Ramp-invariant absolute-acceleration filter coefficients (ISO 18431-4).

    Returns the second-order section arrays ``(b0, b1, b2, a1, a2)`` for a
    bank of base-excited SDOF oscillators, one row per natural frequency
    (a0 is 1).  Mass is normalized to 1; only the damping ratio and the
    natural frequency enter.
    """
    freqs_hz = np.asarray(freqs_hz, dtype=np.float64)
    ts = 1.0 / float(sample_rate_hz)
    wn = 2.0 * np.pi * freqs_hz
    wd = wn * np.sqrt(1.0 - damping_ratio**2)
    E = np.exp(-damping_ratio * wn * ts)
    K = wd * ts
    C = E * np.cos(K)
    Sp = E * np.sin(K) / K
    b0 = 1.0 - Sp
    b1 = 2.0 * (Sp - C)
    b2 = E * E - Sp
    a1 = -2.0 * C
    a2 = E * E
    return b0, b1, b2, a1, a2


# ---------------------------------------------------------------------------
# NumPy/SciPy fallback path
# ---------------------------------------------------------------------------

def _np_filterbank_peaks(sig, pad_len, b0, b1, b2, a1, a2):
    padded = np.concatenate([sig, np.zeros(pad_len)]) if pad_len else sig
    out = np.empty(b0.shape[0])
    for i in range(b0.shape[0]):
        y = lfilter([b0[i], b1[i], b2[i]], [1.0, a1[i], a2[i]], padded)
        out[i] = np.max(np.abs(y))
    return out


def _np_filterbank_responses(sig, pad_len, b0, b1, b2, a1, a2):
    padded = np.concatenate([sig, np.zeros(pad_len)]) if pad_len else sig
    out = np.empty((b0.shape[0], padded.shape[0]))
    for i in range(b0.shape[0]):
        out[i] = lfilter([b0[i], b1[i], b2[i]], [1.0, a1[i], a2[i]], padded)
    return out


def _np_render_decayed_sines(amps, decays, freqs_hz, phases, n_samples, ts):
    t = np.arange(n_samples) * ts
    terms = (
        amps[:, None]
        * np.exp(-decays[:, None] * t[None, :])
        * np.sin(2.0 * np.pi * freqs_hz[:, None] * t[None, :] + phases[:, None])
    )
    return terms.sum(axis=0)


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

if NUMBA_ENABLED:

    @njit(cache=True, nogil=True, parallel=True)
    def _nb_filterbank_peaks(sig, pad_len, b0, b1, b2, a1, a2):
        n_sig = sig.shape[0]
        n_total = n_sig + pad_len
        out = np.empty(b0.shape[0])
        for i in prange(b0.shape[0]):
            x1 = 0.0
            x2 = 0.0
            y1 = 0.0
            y2 = 0.0
            peak = 0.0
            for n in range(n_total):
                x0 = sig[n] if n < n_sig else 0.0
                y0 = b0[i] * x0 + b1[i] * x1 + b2[i] * x2 - a1[i] * y1 - a2[i] * y2
                ay = abs(y0)
                if ay > peak:
                    peak = ay
                x2 = x1
                x1 = x0
                y2 = y1
                y1 = y0
            out[i] = peak
        return out

    @njit(cache=True, nogil=True, parallel=True)
    def _nb_filterbank_responses(sig, pad_len, b0, b1, b2, a1, a2):
        n_sig = sig.shape[0]
        n_total = n_sig + pad_len
        out = np.empty((b0.shape[0], n_total))
        for i in prange(b0.shape[0]):
            x1 = 0.0
            x2 = 0.0
            y1 = 0.0
            y2 = 0.0
            for n in range(n_total):
                x0 = sig[n] if n < n_sig else 0.0
                y0 = b0[i] * x0 + b1[i] * x1 + b2[i] * x2 - a1[i] * y1 - a2[i] * y2
                out[i, n] = y0
                x2 = x1
                x1 = x0
                y2 = y1
                y1 = y0
        return out

    @njit(cache=True, nogil=True, parallel=True)
    def _nb_render_decayed_sines(amps, decays, freqs_hz, phases, n_samples, ts):
        m = amps.shape[0]
        out = np.empty(n_samples)
        for n in prange(n_samples):
            t = n * ts
            acc = 0.0
            for j in range(m):
                acc += amps[j] * np.exp(-decays[j] * t) * np.sin(
                    2.0 * np.pi * freqs_hz[j] * t + phases[j]
                )
            out[n] = acc
        return out


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def filterbank_peaks(sig, pad_len, coeffs):
    """Max |absolute acceleration| per oscillator over the padded record."""
    b0, b1, b2, a1, a2 = coeffs
    sig = np.ascontiguousarray(sig, dtype=np.float64)
    if NUMBA_ENABLED:
        return _nb_filterbank_peaks(sig, pad_len, b0, b1, b2, a1, a2)
    return _np_filterbank_peaks(sig, pad_len, b0, b1, b2, a1, a2)


def filterbank_responses(sig, pad_len, coeffs):
    """Full absolute-acceleration waveforms, shape (F, len(sig) + pad_len)."""
    b0, b1, b2, a1, a2 = coeffs
    sig = np.ascontiguousarray(sig, dtype=np.float64)
    if NUMBA_ENABLED:
        return _nb_filterbank_responses(sig, pad_len, b0, b1, b2, a1, a2)
    return _np_filterbank_responses(sig, pad_len, b0, b1, b2, a1, a2)


def render_decayed_sines(amps, decays, freqs_hz, phases, n_samples, ts):
    """Sum of exponentially decayed sinusoids sampled at n*ts, n = 0..N-1."""
    amps = np.ascontiguousarray(amps, dtype=np.float64)
    decays = np.ascontiguousarray(decays, dtype=np.float64)
    freqs_hz = np.ascontiguousarray(freqs_hz, dtype=np.float64)
    phases = np.ascontiguousarray(phases, dtype=np.float64)
    if NUMBA_ENABLED:
        return _nb_render_decayed_sines(amps, decays, freqs_hz, phases, n_samples, ts)
    return _np_render_decayed_sines(amps, decays, freqs_hz, phases, n_samples, ts)


def set_threads(n: int) -> None:
    """Cap the numba worker pool; no-op on the fallback path."""
    if NUMBA_ENABLED:
        import numba

        numba.set_num_threads(max(1, int(n)))
