"""Differentiable implementations of the five training-loss terms.

These mirror the reference toolkit's loss definitions bin-for-bin (the
golden-parity tests pin them to the `srskit losses-eval` output within
1e-5 relative).  The SDOF oscillator bank is realized in the frequency
domain: the absolute-acceleration response equals the input plus the
second central difference of the damped-sine-kernel convolution, which
is algebraically the same discrete operator as the ramp-invariant
recursive filter but runs as a batched FFT and stays differentiable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch

LOG_EPS = 1e-12


def padding_length(sample_rate_hz: float, f_min_hz: float, damping_ratio: float,
                   scale_p: float = 3.0) -> int:
    full = math.ceil(
        sample_rate_hz / (2.0 * f_min_hz * math.sqrt(1.0 - damping_ratio**2))
    )
    return int(math.ceil(full / scale_p))


def _next_fast_len(target: int) -> int:
    """Smallest 7-smooth integer >= target (fast FFT size)."""
    n = target
    while True:
        m = n
        for p in (2, 3, 5, 7):
            while m % p == 0:
                m //= p
        if m == 1:
            return n
        n += 1


class SdofBank:
    """Batched differentiable SDOF absolute-acceleration responses.

    Precomputes the sampled damped-sine kernels for one frequency grid and
    applies them by FFT convolution; `responses(x)` maps (B, N) signals to
    (B, F, N + pad) oscillator waveforms.
    """

    def __init__(
        self,
        freqs_hz: np.ndarray,
        damping_ratio: float,
        sample_rate_hz: float,
        n_samples: int,
        scale_p: float = 3.0,
        dtype: torch.dtype = torch.float64,
    ):
        self.freqs_hz = np.asarray(freqs_hz, dtype=np.float64)
        self.damping_ratio = float(damping_ratio)
        self.sample_rate_hz = float(sample_rate_hz)
        self.n_samples = int(n_samples)
        self.ts = 1.0 / self.sample_rate_hz
        self.pad = padding_length(sample_rate_hz, self.freqs_hz[0], damping_ratio, scale_p)
        self.n_total = self.n_samples + self.pad
        n_ext = self.n_total + 1
        self.n_ext = n_ext
        self.fft_len = _next_fast_len(2 * n_ext - 1)
        self.dtype = dtype

        t = torch.arange(n_ext, dtype=torch.float64) * self.ts
        wn = torch.tensor(2.0 * np.pi * self.freqs_hz, dtype=torch.float64)
        wd = wn * math.sqrt(1.0 - self.damping_ratio**2)
        kernels = torch.exp(-self.damping_ratio * wn[:, None] * t[None, :]) * torch.sin(
            wd[:, None] * t[None, :]
        )
        scale = -(self.ts / wd)[:, None]
        kernels = (kernels * scale).to(dtype)
        self.kernel_fft = torch.fft.rfft(kernels, n=self.fft_len)

    def responses(self, x: torch.Tensor) -> torch.Tensor:
        """Absolute acceleration per oscillator; x is (B, n_samples)."""
        if x.ndim != 2 or x.shape[1] != self.n_samples:
            raise ValueError(f"expected (B, {self.n_samples}) input, got {tuple(x.shape)}")
        x = x.to(self.dtype)
        batch = x.shape[0]
        padded = torch.nn.functional.pad(x, (0, self.pad))
        extended = torch.nn.functional.pad(padded, (0, 1))
        x_fft = torch.fft.rfft(extended, n=self.fft_len)
        z = torch.fft.irfft(x_fft[:, None, :] * self.kernel_fft[None, :, :],
                            n=self.fft_len)[:, :, : self.n_ext]
        # z[-1] = 0 by causality; second central difference over [0, n_total)
        body = (
            z[:, :, 2 : self.n_ext]
            - 2.0 * z[:, :, 1 : self.n_ext - 1]
            + z[:, :, 0 : self.n_ext - 2]
        )
        first = (z[:, :, 1] - 2.0 * z[:, :, 0]).unsqueeze(-1)
        zdd = torch.cat([first, body], dim=-1) / self.ts**2
        return zdd + padded[:, None, :]

    def srs(self, x: torch.Tensor) -> torch.Tensor:
        """Maximax spectrum, (B, F)."""
        return self.responses(x).abs().amax(dim=-1)


def _floored_log(x: torch.Tensor) -> torch.Tensor:
    return torch.log(torch.clamp(x, min=LOG_EPS))


def loss_ts(target: torch.Tensor, pred: torch.Tensor) -> torch.Tensor:
    """RMSE between time series, per batch element averaged."""
    return torch.sqrt(torch.mean((pred - target) ** 2, dim=-1)).mean()


def loss_srs_from_spectra(target_srs: torch.Tensor, pred_srs: torch.Tensor) -> torch.Tensor:
    """Natural-log MSLE between spectra (B, F)."""
    diff = _floored_log(pred_srs) - _floored_log(target_srs)
    return torch.mean(diff**2)


@dataclass(frozen=True)
class PsdConfig:
    nperseg: int = 1024
    overlap_fraction: float = 0.5
    # Hann window, one-sided density scaling, no detrending


def welch_psd(x: torch.Tensor, sample_rate_hz: float, config: PsdConfig = PsdConfig()) -> torch.Tensor:
    """Welch power spectral density matching the reference estimator."""
    nperseg = config.nperseg
    if x.shape[-1] < nperseg:
        raise ValueError(f"signal shorter than one Welch segment ({x.shape[-1]} < {nperseg})")
    step = nperseg - int(nperseg * config.overlap_fraction)
    window = torch.hann_window(nperseg, periodic=True, dtype=x.dtype)
    segments = x.unfold(-1, nperseg, step) * window
    spectra = torch.fft.rfft(segments, dim=-1)
    power = spectra.real**2 + spectra.imag**2
    scale = 1.0 / (sample_rate_hz * float(torch.sum(window**2)))
    power = power * scale
    power[..., 1:-1] *= 2.0
    return power.mean(dim=-2)


def loss_psd(
    target: torch.Tensor,
    pred: torch.Tensor,
    sample_rate_hz: float,
    config: PsdConfig = PsdConfig(),
) -> torch.Tensor:
    diff = _floored_log(welch_psd(pred, sample_rate_hz, config)) - _floored_log(
        welch_psd(target, sample_rate_hz, config)
    )
    return torch.mean(diff**2)


@dataclass(frozen=True)
class ShapeConfig:
    periods: float = 1.0
    sigma_samples: Optional[float] = None


def loss_shape_from_responses(
    target_resp: torch.Tensor,
    pred_resp: torch.Tensor,
    freqs_hz: np.ndarray,
    sample_rate_hz: float,
    config: ShapeConfig = ShapeConfig(),
) -> torch.Tensor:
    """Gaussian-weighted MSE between peak-aligned responses (B, F, n)."""
    n_win = target_resp.shape[-1]
    center = n_win // 2
    shift_t = center - target_resp.abs().argmax(dim=-1)
    shift_p = center - pred_resp.abs().argmax(dim=-1)
    idx = torch.arange(n_win)
    # circular shift per (batch, frequency): gather at (i - shift) mod n
    gather_t = (idx[None, None, :] - shift_t[:, :, None]) % n_win
    gather_p = (idx[None, None, :] - shift_p[:, :, None]) % n_win
    aligned_t = torch.gather(target_resp, -1, gather_t)
    aligned_p = torch.gather(pred_resp, -1, gather_p)
    if config.sigma_samples is not None:
        sigmas = torch.full((len(freqs_hz),), float(config.sigma_samples),
                            dtype=target_resp.dtype)
    else:
        sigmas = torch.tensor(
            config.periods * sample_rate_hz / np.asarray(freqs_hz), dtype=target_resp.dtype
        )
    offsets = (idx - center).to(target_resp.dtype)
    weight = torch.exp(-0.5 * (offsets[None, :] / sigmas[:, None]) ** 2)
    per_freq = torch.mean(weight[None, :, :] * (aligned_p - aligned_t) ** 2, dim=-1)
    return per_freq.mean()


def kl_divergence(mu: torch.Tensor, log_var: torch.Tensor) -> torch.Tensor:
    """Closed-form KL of a diagonal Gaussian posterior from N(0, I),
    summed over latent dimensions, averaged over the batch."""
    return 0.5 * torch.sum(mu**2 + torch.exp(log_var) - log_var - 1.0, dim=-1).mean()


@dataclass(frozen=True)
class LossWeights:
    w_shape: float = 0.282
    w_ts: float = 0.062
    w_psd: float = 0.0147
    w_srs: float = 0.237
    w_kl: float = 0.404

    def to_dict(self) -> dict:
        return {
            "w_shape": self.w_shape,
            "w_ts": self.w_ts,
            "w_psd": self.w_psd,
            "w_srs": self.w_srs,
            "w_kl": self.w_kl,
        }


def composite_loss(
    bank: SdofBank,
    target: torch.Tensor,
    pred: torch.Tensor,
    mu: torch.Tensor,
    log_var: torch.Tensor,
    weights: LossWeights = LossWeights(),
    shape_config: ShapeConfig = ShapeConfig(),
    psd_config: PsdConfig = PsdConfig(),
) -> dict:
    """All five parts plus the weighted total, as scalar tensors."""
    with torch.no_grad():
        target_resp = bank.responses(target)
        target_srs = target_resp.abs().amax(dim=-1)
    pred_resp = bank.responses(pred)
    pred_srs = pred_resp.abs().amax(dim=-1)
    parts = {
        "shape": loss_shape_from_responses(
            target_resp, pred_resp, bank.freqs_hz, bank.sample_rate_hz, shape_config
        ),
        "ts": loss_ts(target, pred),
        "psd": loss_psd(target, pred, bank.sample_rate_hz, psd_config),
        "srs": loss_srs_from_spectra(target_srs, pred_srs),
        "kl": kl_divergence(mu, log_var),
    }
    parts["total"] = (
        weights.w_shape * parts["shape"]
        + weights.w_ts * parts["ts"]
        + weights.w_psd * parts["psd"]
        + weights.w_srs * parts["srs"]
        + weights.w_kl * parts["kl"]
    )
    return parts
