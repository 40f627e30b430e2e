"""Training loop: checkpointing, JSONL loss log, deterministic batching."""

from __future__ import annotations

import json
import os
import time

import numpy as np
import torch

from .dataset import ShockDataset, encode_condition
from .losses import LossWeights, SdofBank, composite_loss
from .model import ARCHITECTURE, ConditionalVae, CvaeConfig


class NonFiniteLossError(RuntimeError):
    pass


def _atomic_write(path: str, data: bytes) -> None:
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def save_checkpoint(directory, model: ConditionalVae, config: CvaeConfig,
                    grid: dict, extra: dict) -> None:
    os.makedirs(directory, exist_ok=True)
    payload_path = os.path.join(directory, "checkpoint.pt")
    tmp = payload_path + ".tmp"
    torch.save({"state_dict": model.state_dict(), "config": config.to_dict()}, tmp)
    os.replace(tmp, payload_path)
    manifest = {
        "architecture": ARCHITECTURE,
        "config": config.to_dict(),
        "grid": grid,
        **extra,
    }
    _atomic_write(
        os.path.join(directory, "manifest.json"),
        json.dumps(manifest, indent=2, sort_keys=True).encode(),
    )


def load_checkpoint(directory):
    with open(os.path.join(directory, "manifest.json"), "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    raw = torch.load(os.path.join(directory, "checkpoint.pt"), weights_only=True)
    cfg = manifest["config"]
    config = CvaeConfig(
        latent_dim=cfg["latent_dim"],
        loss_weights=LossWeights(**cfg["loss_weights"]),
        epochs=cfg["epochs"],
        batch_size=cfg["batch_size"],
        learning_rate=cfg["learning_rate"],
        seed=cfg["seed"],
        dataset_path=cfg["dataset_path"],
        n_samples=cfg["n_samples"],
        condition_dim=cfg["condition_dim"],
    )
    model = ConditionalVae(config)
    model.load_state_dict(raw["state_dict"])
    model.eval()
    return model, config, manifest


def _load_training_tensors(dataset: ShockDataset, config: CvaeConfig):
    if dataset.grid.count != config.condition_dim:
        raise ValueError(
            f"dataset grid has {dataset.grid.count} frequencies but the model "
            f"expects condition_dim={config.condition_dim}"
        )
    if dataset.n_samples != config.n_samples:
        raise ValueError(
            f"dataset records have {dataset.n_samples} samples but the model "
            f"expects n_samples={config.n_samples}"
        )
    spectra = dataset.spectra_matrix()
    if dataset.normalization is None and not np.allclose(spectra.max(axis=1), 1.0, atol=1e-3):
        raise ValueError("training expects max-normalized records (spectrum max == 1)")
    freqs = dataset.grid.freqs_hz()
    conditions = encode_condition(spectra.astype(np.float64), freqs).astype(np.float32)
    signals = dataset.signals_matrix()
    return (
        torch.from_numpy(signals.copy()),
        torch.from_numpy(conditions.copy()),
        freqs,
    )


def train(config: CvaeConfig, out_dir: str, log_every: int = 0) -> dict:
    """Train on a normalized dataset; returns the per-epoch loss summary.

    Writes `checkpoint.pt`, `manifest.json`, and `training_log.jsonl` into
    `out_dir`.  Aborts with diagnostics if any loss part goes non-finite.
    """
    torch.manual_seed(config.seed)
    dataset = ShockDataset(config.dataset_path)
    signals, conditions, freqs = _load_training_tensors(dataset, config)
    bank = SdofBank(
        freqs,
        dataset.grid.damping_ratio,
        dataset.sample_rate_hz,
        config.n_samples,
        dtype=torch.float32,
    )
    model = ConditionalVae(config)
    model.train()
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    shuffle_gen = torch.Generator().manual_seed(config.seed + 1)
    noise_gen = torch.Generator().manual_seed(config.seed + 2)

    n = signals.shape[0]
    log_path = os.path.join(out_dir, "training_log.jsonl")
    os.makedirs(out_dir, exist_ok=True)
    epochs = []
    with open(log_path, "w", encoding="utf-8") as log_fh:
        for epoch in range(config.epochs):
            start = time.monotonic()
            order = torch.randperm(n, generator=shuffle_gen)
            sums = {k: 0.0 for k in ("shape", "ts", "psd", "srs", "kl", "total")}
            n_batches = 0
            for lo in range(0, n, config.batch_size):
                idx = order[lo : lo + config.batch_size]
                x = signals[idx]
                cond = conditions[idx]
                pred, mu, log_var = model(x, cond, generator=noise_gen)
                parts = composite_loss(
                    bank, x, pred, mu, log_var, config.loss_weights
                )
                total = parts["total"]
                if not torch.isfinite(total):
                    diagnostics = {k: float(v) for k, v in parts.items()}
                    raise NonFiniteLossError(
                        f"non-finite loss at epoch {epoch}, batch {n_batches}: {diagnostics}"
                    )
                optimizer.zero_grad()
                total.backward()
                optimizer.step()
                for key in sums:
                    sums[key] += float(parts[key].detach())
                n_batches += 1
            record = {
                "epoch": epoch,
                **{k: sums[k] / n_batches for k in sums},
                "wall_s": time.monotonic() - start,
            }
            epochs.append(record)
            log_fh.write(json.dumps(record) + "\n")
            log_fh.flush()
            if log_every and epoch % log_every == 0:
                print(
                    f"epoch {epoch}: total {record['total']:.4f} "
                    f"(shape {record['shape']:.4f}, srs {record['srs']:.4f}, "
                    f"kl {record['kl']:.4f})",
                    flush=True,
                )

    grid = {
        "f_min_hz": dataset.grid.f_min_hz,
        "f_max_hz": dataset.grid.f_max_hz,
        "count": dataset.grid.count,
        "damping_ratio": dataset.grid.damping_ratio,
        "sample_rate_hz": dataset.sample_rate_hz,
    }
    save_checkpoint(
        out_dir,
        model,
        config,
        grid,
        {"final_epoch": epochs[-1] if epochs else None, "n_records": n},
    )
    return {"epochs": epochs, "out_dir": out_dir}
