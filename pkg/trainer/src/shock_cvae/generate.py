"""Conditional sampling: target spectrum in, candidate time series out."""

from __future__ import annotations

import numpy as np
import torch

from .dataset import (
    GridSpec,
    ShockDataset,
    encode_condition,
    normalize_by_spectrum_max,
    write_dataset,
)
from .losses import SdofBank
from .train import load_checkpoint


class Sampler:
    """Loads a checkpoint once and draws candidates for target spectra."""

    def __init__(self, checkpoint_dir: str):
        self.model, self.config, self.manifest = load_checkpoint(checkpoint_dir)
        grid = self.manifest["grid"]
        self.grid = GridSpec(
            grid["f_min_hz"], grid["f_max_hz"], grid["count"], grid["damping_ratio"]
        )
        self.sample_rate_hz = float(grid["sample_rate_hz"])
        self.freqs_hz = self.grid.freqs_hz()

    def draw(
        self,
        target_spectrum: np.ndarray,
        n_draws: int,
        seed: int,
        zero_noise: bool = False,
    ):
        """Draw `n_draws` signals conditioned on one target spectrum.

        The target is max-normalized, the network runs on the normalized
        encoding, and outputs are rescaled by the stored factor.  Returns
        (signals of shape (n_draws, n_samples), scale).
        """
        target_spectrum = np.asarray(target_spectrum, dtype=np.float64)
        if len(target_spectrum) != self.grid.count:
            raise ValueError(
                f"target spectrum has {len(target_spectrum)} points, "
                f"training grid has {self.grid.count}"
            )
        _, normalized, scale = normalize_by_spectrum_max(None, target_spectrum)
        condition = torch.from_numpy(
            encode_condition(normalized, self.freqs_hz).astype(np.float32)
        ).expand(n_draws, -1).contiguous()
        if zero_noise:
            z = torch.zeros(n_draws, self.config.latent_dim)
        else:
            gen = torch.Generator().manual_seed(seed)
            z = torch.randn(n_draws, self.config.latent_dim, generator=gen)
        with torch.no_grad():
            decoded = self.model.decoder(z, condition)
        return decoded.double().numpy() * scale, scale


def generate(
    checkpoint_dir: str,
    target_spectrum: np.ndarray,
    n_draws: int,
    seed: int,
    zero_noise: bool = False,
):
    return Sampler(checkpoint_dir).draw(target_spectrum, n_draws, seed, zero_noise)


def generate_candidates_dataset(
    checkpoint_dir: str,
    targets_path: str,
    out_path: str,
    seed: int,
    draws_per_target: int = 1,
) -> int:
    """One candidate signal per target record, written in the dataset
    container format (spectra recomputed so records stay paired)."""
    targets = ShockDataset(targets_path)
    sampler = Sampler(checkpoint_dir)
    if targets.grid.count != sampler.grid.count:
        raise ValueError("target dataset grid does not match the training grid")
    n_samples = sampler.config.n_samples
    signals = np.empty((len(targets), n_samples), dtype=np.float32)
    for j in range(len(targets)):
        drawn, _ = sampler.draw(targets.spectrum(j), draws_per_target, seed + j)
        signals[j] = drawn[0].astype(np.float32)
    bank = SdofBank(
        targets.grid.freqs_hz(),
        targets.grid.damping_ratio,
        targets.sample_rate_hz,
        n_samples,
        dtype=torch.float64,
    )
    with torch.no_grad():
        spectra = bank.srs(torch.from_numpy(signals.astype(np.float64))).numpy()
    write_dataset(
        out_path,
        signals,
        spectra.astype(np.float32),
        {
            "sample_rate_hz": targets.sample_rate_hz,
            "grid_f_min_hz": targets.grid.f_min_hz,
            "grid_f_max_hz": targets.grid.f_max_hz,
            "damping_ratio": targets.grid.damping_ratio,
            "seed": seed,
            "generator_params": {"source": "shock-cvae", "checkpoint": checkpoint_dir},
        },
    )
    return len(targets)
