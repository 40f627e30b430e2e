"""Reference numeric implementations of the five training-loss terms.

These are the non-differentiable-context ground truth used for golden-file
parity with the trainer and for offline analysis: waveform-shape loss over
aligned SDOF responses, time-series RMSE, Welch-PSD MSLE, SRS MSLE, and
the closed-form Gaussian KL divergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.signal import welch

from .srs import DEFAULT_PAD_SCALE, sdof_responses
from .types import FrequencyGrid, Signal, Spectrum

LOG_EPS = 1e-12


@dataclass(frozen=True)
class LossWeights:
    w_shape: float = 0.282
    w_ts: float = 0.062
    w_psd: float = 0.0147
    w_srs: float = 0.237
    w_kl: float = 0.404

    def __post_init__(self):
        vals = (self.w_shape, self.w_ts, self.w_psd, self.w_srs, self.w_kl)
        if any(w < 0 for w in vals):
            raise ValueError("loss weights must be non-negative")
        if not any(w > 0 for w in vals):
            raise ValueError("at least one loss weight must be positive")

    def to_dict(self) -> dict:
        return {
            "w_shape": self.w_shape,
            "w_ts": self.w_ts,
            "w_psd": self.w_psd,
            "w_srs": self.w_srs,
            "w_kl": self.w_kl,
        }


@dataclass(frozen=True)
class LatentStats:
    """Mean and log-variance of a diagonal Gaussian posterior."""

    mu: np.ndarray
    log_var: np.ndarray

    def __post_init__(self):
        mu = np.array(self.mu, dtype=np.float64, copy=True)
        log_var = np.array(self.log_var, dtype=np.float64, copy=True)
        if mu.shape != log_var.shape or mu.ndim != 1:
            raise ValueError("mu and log_var must be 1-D vectors of equal length")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(log_var))):
            raise ValueError("latent statistics must be finite")
        mu.setflags(write=False)
        log_var.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "log_var", log_var)


class LossParts(NamedTuple):
    shape: float
    ts: float
    psd: float
    srs: float
    kl: float


@dataclass(frozen=True)
class PsdConfig:
    """Welch estimator settings: segmented Hann windows, 50% overlap,
    one-sided density scaling, no detrending."""

    nperseg: int = 1024
    overlap_fraction: float = 0.5
    window: str = "hann"
    log_base: str = "e"

    def noverlap(self) -> int:
        return int(self.nperseg * self.overlap_fraction)


@dataclass(frozen=True)
class ShapeConfig:
    """Gaussian weighting for the shape loss.

    The window width is one natural period of the oscillator by default
    (sigma_i = periods * fs / f_i samples); ``sigma_samples`` overrides it
    with a fixed width for every frequency.
    """

    periods: float = 1.0
    sigma_samples: Optional[float] = None
    scale_p: float = DEFAULT_PAD_SCALE


def _check_same_length(target: Signal, pred: Signal) -> None:
    if len(target) != len(pred):
        raise ValueError(f"signal lengths differ: {len(target)} vs {len(pred)}")
    if target.sample_rate_hz != pred.sample_rate_hz:
        raise ValueError("signals have different sample rates")


def _log(x: np.ndarray, base: str) -> np.ndarray:
    floored = np.maximum(x, LOG_EPS)
    if base == "e":
        return np.log(floored)
    if base == "10":
        return np.log10(floored)
    raise ValueError(f"log_base must be 'e' or '10', got {base!r}")


def loss_ts(target: Signal, pred: Signal) -> float:
    """Root-mean-square error between the two time series."""
    _check_same_length(target, pred)
    return float(np.sqrt(np.mean((pred.samples - target.samples) ** 2)))


def loss_srs(target: Spectrum, pred: Spectrum, log_base: str = "e") -> float:
    """Mean squared log error between two spectra on one grid."""
    if not target.same_grid(pred):
        raise ValueError("target and pred spectra are on different grids")
    diff = _log(pred.values, log_base) - _log(target.values, log_base)
    return float(np.mean(diff**2))


def loss_psd(target: Signal, pred: Signal, psd_config: PsdConfig = PsdConfig()) -> float:
    """Mean squared log error between Welch PSD estimates of two signals."""
    _check_same_length(target, pred)
    if len(target) < psd_config.nperseg:
        raise ValueError(
            f"signals shorter than one Welch segment ({len(target)} < {psd_config.nperseg})"
        )
    common = dict(
        fs=target.sample_rate_hz,
        window=psd_config.window,
        nperseg=psd_config.nperseg,
        noverlap=psd_config.noverlap(),
        detrend=False,
        return_onesided=True,
        scaling="density",
    )
    _, p_target = welch(target.samples, **common)
    _, p_pred = welch(pred.samples, **common)
    diff = _log(p_pred, psd_config.log_base) - _log(p_target, psd_config.log_base)
    return float(np.mean(diff**2))


def _shape_terms(
    target: Signal,
    pred: Signal,
    grid: FrequencyGrid,
    weight_config: ShapeConfig,
) -> np.ndarray:
    """Per-frequency weighted MSE between peak-aligned SDOF waveforms."""
    resp_t = sdof_responses(target, grid, weight_config.scale_p)
    resp_p = sdof_responses(pred, grid, weight_config.scale_p)
    n_win = resp_t.absolute_accel.shape[1]
    center = n_win // 2
    offsets = np.arange(n_win) - center
    if weight_config.sigma_samples is not None:
        sigmas = np.full(len(grid), float(weight_config.sigma_samples))
    else:
        sigmas = weight_config.periods * target.sample_rate_hz / grid.freqs_hz
    terms = np.empty(len(grid))
    for i in range(len(grid)):
        aligned_t = np.roll(resp_t.absolute_accel[i], center - resp_t.peak_index[i])
        aligned_p = np.roll(resp_p.absolute_accel[i], center - resp_p.peak_index[i])
        weight = np.exp(-0.5 * (offsets / sigmas[i]) ** 2)
        terms[i] = np.mean(weight * (aligned_p - aligned_t) ** 2)
    return terms


def loss_shape(
    target: Signal,
    pred: Signal,
    grid: FrequencyGrid,
    weight_config: ShapeConfig = ShapeConfig(),
) -> float:
    """Weighted MSE between peak-aligned SDOF waveforms, averaged over the bank.

    Each oscillator response is circularly shifted so the sample of maximum
    absolute response sits at the window center, then compared under a
    frequency-dependent Gaussian weight.  Circular shifting preserves the
    full response energy, avoiding edge-loss bias.
    """
    _check_same_length(target, pred)
    return float(np.mean(_shape_terms(target, pred, grid, weight_config)))


def kl_divergence(stats: LatentStats) -> float:
    """Closed-form KL divergence of a diagonal Gaussian posterior from N(0, I)."""
    var = np.exp(stats.log_var)
    return float(0.5 * np.sum(stats.mu**2 + var - stats.log_var - 1.0))


def loss_total(parts: LossParts, weights: LossWeights) -> float:
    """Weighted combination of the five loss components."""
    values = (parts.shape, parts.ts, parts.psd, parts.srs, parts.kl)
    if not all(math.isfinite(v) for v in values):
        raise ValueError("loss parts must be finite")
    return (
        weights.w_shape * parts.shape
        + weights.w_ts * parts.ts
        + weights.w_psd * parts.psd
        + weights.w_srs * parts.srs
        + weights.w_kl * parts.kl
    )


def evaluate_losses(
    target: Signal,
    pred: Signal,
    grid: FrequencyGrid,
    weights: LossWeights = LossWeights(),
    latent: Optional[LatentStats] = None,
    psd_config: PsdConfig = PsdConfig(),
    shape_config: ShapeConfig = ShapeConfig(),
    scale_p: float = DEFAULT_PAD_SCALE,
) -> dict:
    """All five loss parts plus the weighted total for a (target, pred) pair.

    The SRS term recomputes both spectra from the signals.  The KL term is
    zero unless latent statistics are supplied.
    """
    from .srs import srs_filterbank

    parts = LossParts(
        shape=loss_shape(target, pred, grid, shape_config),
        ts=loss_ts(target, pred),
        psd=loss_psd(target, pred, psd_config),
        srs=loss_srs(
            srs_filterbank(target, grid, scale_p), srs_filterbank(pred, grid, scale_p)
        ),
        kl=0.0 if latent is None else kl_divergence(latent),
    )
    return {
        "shape": parts.shape,
        "ts": parts.ts,
        "psd": parts.psd,
        "srs": parts.srs,
        "kl": parts.kl,
        "total": loss_total(parts, weights),
        "weights": weights.to_dict(),
    }
