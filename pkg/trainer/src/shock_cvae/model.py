"""Conditional VAE for shock synthesis.

The encoder ingests the time series with the spectrum encoding injected
as a second channel; two linear heads produce the posterior mean and
log-variance.  The decoder consumes [latent ‖ condition] and mirrors the
encoder with transposed convolutions back to the signal length.  Fixed
toy architecture: four conv blocks down, four up.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import torch
from torch import nn

from .losses import LossWeights

ARCHITECTURE = "conv4-mirror-v1"
_CHANNELS = (16, 32, 64, 128)
_STRIDE = 4
_KERNEL = 9


@dataclass
class CvaeConfig:
    latent_dim: int = 100
    loss_weights: LossWeights = field(default_factory=LossWeights)
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    dataset_path: str = ""
    n_samples: int = 2048
    condition_dim: int = 40

    def __post_init__(self):
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be >= 1")
        if self.n_samples % _STRIDE**4 != 0:
            raise ValueError(
                f"n_samples must be divisible by {_STRIDE ** 4} for the fixed architecture"
            )

    def to_dict(self) -> dict:
        return {
            "latent_dim": self.latent_dim,
            "loss_weights": self.loss_weights.to_dict(),
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
            "dataset_path": self.dataset_path,
            "n_samples": self.n_samples,
            "condition_dim": self.condition_dim,
            "architecture": ARCHITECTURE,
        }


class Encoder(nn.Module):
    def __init__(self, n_samples: int, condition_dim: int, latent_dim: int):
        super().__init__()
        self.condition_proj = nn.Linear(condition_dim, n_samples)
        blocks = []
        in_ch = 2
        for out_ch in _CHANNELS:
            blocks.append(nn.Conv1d(in_ch, out_ch, _KERNEL, stride=_STRIDE, padding=_KERNEL // 2))
            blocks.append(nn.GELU())
            in_ch = out_ch
        self.conv = nn.Sequential(*blocks)
        flat = _CHANNELS[-1] * (n_samples // _STRIDE ** len(_CHANNELS))
        self.hidden = nn.Linear(flat, 256)
        self.mu_head = nn.Linear(256, latent_dim)
        self.log_var_head = nn.Linear(256, latent_dim)

    def forward(self, x: torch.Tensor, condition: torch.Tensor):
        cond_channel = self.condition_proj(condition)
        stacked = torch.stack([x, cond_channel], dim=1)
        h = self.conv(stacked).flatten(1)
        h = torch.nn.functional.gelu(self.hidden(h))
        return self.mu_head(h), self.log_var_head(h)


class Decoder(nn.Module):
    def __init__(self, n_samples: int, condition_dim: int, latent_dim: int):
        super().__init__()
        self.base_len = n_samples // _STRIDE ** len(_CHANNELS)
        self.expand = nn.Linear(latent_dim + condition_dim, _CHANNELS[-1] * self.base_len)
        blocks = []
        chans = list(reversed(_CHANNELS))
        for i in range(len(chans) - 1):
            blocks.append(
                nn.ConvTranspose1d(
                    chans[i], chans[i + 1], _KERNEL, stride=_STRIDE,
                    padding=_KERNEL // 2, output_padding=_STRIDE - 1,
                )
            )
            blocks.append(nn.GELU())
        blocks.append(
            nn.ConvTranspose1d(
                chans[-1], chans[-1], _KERNEL, stride=_STRIDE,
                padding=_KERNEL // 2, output_padding=_STRIDE - 1,
            )
        )
        blocks.append(nn.GELU())
        self.deconv = nn.Sequential(*blocks)
        self.head = nn.Conv1d(chans[-1], 1, _KERNEL, padding=_KERNEL // 2)

    def forward(self, z: torch.Tensor, condition: torch.Tensor) -> torch.Tensor:
        h = self.expand(torch.cat([z, condition], dim=-1))
        h = h.view(h.shape[0], _CHANNELS[-1], self.base_len)
        return self.head(self.deconv(h)).squeeze(1)


class ConditionalVae(nn.Module):
    def __init__(self, config: CvaeConfig):
        super().__init__()
        self.config = config
        self.encoder = Encoder(config.n_samples, config.condition_dim, config.latent_dim)
        self.decoder = Decoder(config.n_samples, config.condition_dim, config.latent_dim)

    def reparameterize(
        self, mu: torch.Tensor, log_var: torch.Tensor,
        generator: Optional[torch.Generator] = None,
        zero_noise: bool = False,
    ) -> torch.Tensor:
        if zero_noise:
            return mu
        eps = torch.randn(mu.shape, generator=generator, dtype=mu.dtype)
        return mu + torch.exp(0.5 * log_var) * eps

    def forward(self, x: torch.Tensor, condition: torch.Tensor,
                generator: Optional[torch.Generator] = None,
                zero_noise: bool = False):
        mu, log_var = self.encoder(x, condition)
        z = self.reparameterize(mu, log_var, generator, zero_noise)
        return self.decoder(z, condition), mu, log_var
