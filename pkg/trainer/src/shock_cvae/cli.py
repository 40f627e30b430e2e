"""Command-line interface: train, generate, and loss evaluation."""

from __future__ import annotations

import argparse
import json
import sys

import torch

from .dataset import ShockDataset
from .losses import (
    LossWeights,
    SdofBank,
    kl_divergence,
    loss_psd,
    loss_shape_from_responses,
    loss_srs_from_spectra,
    loss_ts,
)
from .model import CvaeConfig
from .train import train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shock-cvae", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on a normalized dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True, help="checkpoint directory")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--latent-dim", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("generate", help="draw candidates for target spectra")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--targets", required=True, help="dataset of target records")
    p.add_argument("--out", required=True, help="output candidates dataset")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("losses", help="five loss parts for a (target, pred) pair")
    p.add_argument("--target", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--target-index", type=int, default=0)
    p.add_argument("--pred-index", type=int, default=0)
    p.add_argument("--latent", help="JSON file with mu/log_var for the KL part")
    p.add_argument("--out", help="output JSON (default stdout)")
    return parser


def _cmd_train(args) -> int:
    ds = ShockDataset(args.dataset)
    config = CvaeConfig(
        latent_dim=args.latent_dim,
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        seed=args.seed,
        dataset_path=args.dataset,
        n_samples=ds.n_samples,
        condition_dim=ds.grid.count,
    )
    result = train(config, args.out, log_every=1)
    last = result["epochs"][-1]
    print(f"trained {config.epochs} epochs; final total loss {last['total']:.4f}")
    return 0


def _cmd_generate(args) -> int:
    from .generate import generate_candidates_dataset

    count = generate_candidates_dataset(args.checkpoint, args.targets, args.out, args.seed)
    print(f"generated {count} candidates to {args.out}")
    return 0


def _cmd_losses(args) -> int:
    """Loss parts computed with this package's differentiable kernels, in
    float64, on records drawn from dataset files.  Output schema matches
    the reference CLI for direct parity comparison."""
    ds_t = ShockDataset(args.target)
    ds_p = ShockDataset(args.pred)
    target = torch.from_numpy(ds_t.signal(args.target_index)).unsqueeze(0)
    pred = torch.from_numpy(ds_p.signal(args.pred_index)).unsqueeze(0)
    freqs = ds_t.grid.freqs_hz()
    bank = SdofBank(
        freqs, ds_t.grid.damping_ratio, ds_t.sample_rate_hz, ds_t.n_samples,
        dtype=torch.float64,
    )
    resp_t = bank.responses(target)
    resp_p = bank.responses(pred)
    kl = 0.0
    if args.latent:
        with open(args.latent, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        kl = float(
            kl_divergence(
                torch.tensor([raw["mu"]], dtype=torch.float64),
                torch.tensor([raw["log_var"]], dtype=torch.float64),
            )
        )
    weights = LossWeights()
    parts = {
        "shape": float(
            loss_shape_from_responses(resp_t, resp_p, freqs, ds_t.sample_rate_hz)
        ),
        "ts": float(loss_ts(target, pred)),
        "psd": float(loss_psd(target, pred, ds_t.sample_rate_hz)),
        "srs": float(
            loss_srs_from_spectra(
                resp_t.abs().amax(dim=-1), resp_p.abs().amax(dim=-1)
            )
        ),
        "kl": kl,
    }
    parts["total"] = (
        weights.w_shape * parts["shape"]
        + weights.w_ts * parts["ts"]
        + weights.w_psd * parts["psd"]
        + weights.w_srs * parts["srs"]
        + weights.w_kl * parts["kl"]
    )
    parts["weights"] = weights.to_dict()
    text = json.dumps(parts, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return {"train": _cmd_train, "generate": _cmd_generate, "losses": _cmd_losses}[
        args.command
    ](args)


if __name__ == "__main__":
    sys.exit(main())
