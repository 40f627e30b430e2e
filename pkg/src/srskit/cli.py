"""Command-line interface.

One executable with subcommands for generation, SRS computation, SDS
fitting, loss evaluation, hold-out evaluation, aggregation, CSV export,
and benchmarking.  Machine-readable output is JSON; CSV is emitted only
for plot data.

Exit codes: 0 success, 1 usage error, 2 data error, 3 budget exhausted.
Errors are reported on standard error as single-line JSON.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import _kernels
from .bench import format_benchmark, run_benchmark
from .dataset import (
    DatasetFormatError,
    DatasetManifest,
    export_spectra_csv,
    read_dataset,
    write_dataset,
)
from .losses import LatentStats, LossWeights, evaluate_losses
from .metrics import (
    SpectrumEnsemble,
    aggregate_mean,
    aggregate_upper_tol,
    evaluate_holdout,
    write_report_csv,
)
from .sds import BudgetExhaustedError, FitConfig, GaConfig, fit_sds, render_sds
from .srs import DEFAULT_PAD_SCALE, log_frequency_grid, srs_filterbank
from .synth import GenParams, generate_dataset

_WIDTH = 100


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _formatter(prog):
    return argparse.HelpFormatter(prog, width=_WIDTH)


def _parse_grid(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(f"--grid expects fmin,fmax,count, got {text!r}")
    return float(parts[0]), float(parts[1]), int(parts[2])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="srskit", description=__doc__, formatter_class=_formatter)
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="cap the kernel worker pool (default: SRSKIT_THREADS or all cores)",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("gen", help="generate a synthetic shock dataset", formatter_class=_formatter)
    p.add_argument("--count", type=int, required=True, help="number of records")
    p.add_argument("--seed", type=int, default=0, help="dataset seed")
    p.add_argument("--out", required=True, help="output dataset file")
    p.add_argument("--params", help="JSON file of generator parameter overrides")
    p.add_argument("--normalize", action="store_true", help="max-norm each record pair")
    p.add_argument("--grid", default="10,4096,100", help="fmin,fmax,count (default 10,4096,100)")
    p.add_argument("--zeta", type=float, default=0.03, help="damping ratio (default 0.03)")
    p.add_argument("--pad-scale", type=float, default=DEFAULT_PAD_SCALE, help="padding scale p")

    p = sub.add_parser("srs", help="recompute spectra for a dataset", formatter_class=_formatter)
    p.add_argument("--in", dest="infile", required=True, help="input dataset file")
    p.add_argument("--out", required=True, help="output dataset file")
    p.add_argument("--grid", help="fmin,fmax,count (default: manifest grid)")
    p.add_argument("--zeta", type=float, help="damping ratio (default: manifest value)")
    p.add_argument("--pad-scale", type=float, default=DEFAULT_PAD_SCALE, help="padding scale p")

    p = sub.add_parser("sds-fit", help="fit decayed-sinusoid models", formatter_class=_formatter)
    p.add_argument("--target", required=True, help="target dataset file")
    p.add_argument("--out", required=True, help="output dataset of fitted signals")
    p.add_argument("--models", help="JSON file for fitted models and losses")
    p.add_argument("--index", type=int, help="fit a single record (default: all)")
    p.add_argument("--atoms", type=int, default=12, help="number of atoms M (default 12)")
    p.add_argument("--restarts", type=int, default=8, help="optimizer restarts (default 8)")
    p.add_argument("--max-iters", type=int, default=350, help="objective evaluations per restart")
    p.add_argument("--ga", action="store_true", help="enable genetic refinement")
    p.add_argument("--ga-population", type=int, default=64)
    p.add_argument("--ga-generations", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget-s", type=float, help="wall-clock budget per record, seconds")
    p.add_argument("--pad-scale", type=float, default=DEFAULT_PAD_SCALE)

    p = sub.add_parser("losses-eval", help="five loss parts for a (target, pred) pair",
                       formatter_class=_formatter)
    p.add_argument("--target", required=True, help="target dataset file")
    p.add_argument("--pred", required=True, help="prediction dataset file")
    p.add_argument("--target-index", type=int, default=0)
    p.add_argument("--pred-index", type=int, default=0)
    p.add_argument("--latent", help="JSON file with mu/log_var for the KL part")
    p.add_argument("--weights", help="JSON file of loss weights")
    p.add_argument("--grid", help="fmin,fmax,count (default: target manifest grid)")
    p.add_argument("--zeta", type=float, help="damping ratio (default: manifest value)")
    p.add_argument("--pad-scale", type=float, default=DEFAULT_PAD_SCALE)
    p.add_argument("--out", help="output JSON file (default: stdout)")

    p = sub.add_parser("eval", help="hold-out evaluation report", formatter_class=_formatter)
    p.add_argument("--targets", required=True, help="hold-out target dataset")
    p.add_argument("--candidates", required=True, help="candidate dataset (method A)")
    p.add_argument("--baseline", help="baseline candidate dataset (method B)")
    p.add_argument("--report", required=True, help="output JSON report")
    p.add_argument("--csv", help="directory for plot-ready CSV artifacts")
    p.add_argument("--grid", help="fmin,fmax,count (default: target manifest grid)")
    p.add_argument("--zeta", type=float, help="damping ratio (default: manifest value)")
    p.add_argument("--pad-scale", type=float, default=DEFAULT_PAD_SCALE)

    p = sub.add_parser("aggregate", help="aggregate a dataset's spectra", formatter_class=_formatter)
    p.add_argument("--in", dest="infile", required=True, help="input dataset file")
    p.add_argument("--mode", choices=("mean", "upper-tol"), required=True)
    p.add_argument("--k", type=float, default=3.0, help="k-factor for upper-tol (default 3)")
    p.add_argument("--out", help="output JSON file (default: stdout)")

    p = sub.add_parser("export-csv", help="dump spectra as (record, freq, value) CSV",
                       formatter_class=_formatter)
    p.add_argument("--in", dest="infile", required=True, help="input dataset file")
    p.add_argument("--out", required=True, help="output CSV file")

    p = sub.add_parser("bench", help="time the hot operations on both kernel paths",
                       formatter_class=_formatter)
    p.add_argument("--json", action="store_true", help="emit JSON instead of text")
    p.add_argument("--n-samples", type=int, default=9000)
    p.add_argument("--repeats", type=int, default=10)

    return parser


def _grid_from_args(args, manifest: DatasetManifest = None):
    if getattr(args, "grid", None):
        fmin, fmax, count = _parse_grid(args.grid)
        zeta = args.zeta if getattr(args, "zeta", None) is not None else (
            manifest.damping_ratio if manifest is not None else 0.03
        )
        return log_frequency_grid(fmin, fmax, count, zeta)
    if manifest is None:
        raise UsageError("--grid is required here")
    zeta = args.zeta if getattr(args, "zeta", None) is not None else manifest.damping_ratio
    return log_frequency_grid(
        manifest.grid_f_min_hz, manifest.grid_f_max_hz, manifest.grid_count, zeta
    )


def _write_json(payload: dict, path) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _cmd_gen(args) -> int:
    overrides = {}
    if args.params:
        with open(args.params, "r", encoding="utf-8") as fh:
            overrides = json.load(fh)
    overrides["seed"] = args.seed
    params = GenParams.from_dict(overrides)
    fmin, fmax, count = _parse_grid(args.grid)
    grid = log_frequency_grid(fmin, fmax, count, args.zeta)
    generate_dataset(
        params, args.count, grid, args.out, scale_p=args.pad_scale, normalize=args.normalize
    )
    print(f"wrote {args.count} records to {args.out}")
    return 0


def _cmd_srs(args) -> int:
    ds = read_dataset(args.infile)
    grid = _grid_from_args(args, ds.manifest)

    def records():
        for i in range(len(ds)):
            signal = ds.signal(i)
            yield signal, srs_filterbank(signal, grid, args.pad_scale)

    manifest = DatasetManifest(
        count=len(ds),
        n_samples=ds.manifest.n_samples,
        sample_rate_hz=ds.manifest.sample_rate_hz,
        grid_f_min_hz=grid.f_min_hz,
        grid_f_max_hz=grid.f_max_hz,
        grid_count=len(grid),
        damping_ratio=grid.damping_ratio,
        noise_var=ds.manifest.noise_var,
        seed=ds.manifest.seed,
        generator_params=ds.manifest.generator_params,
        pad_scale=args.pad_scale,
    )
    write_dataset(args.out, records(), manifest)
    print(f"recomputed {len(ds)} spectra into {args.out}")
    return 0


def _cmd_sds_fit(args) -> int:
    ds = read_dataset(args.target)
    grid = ds.grid
    config = FitConfig(
        m_atoms=args.atoms,
        max_iters=args.max_iters,
        restarts=args.restarts,
        time_budget_s=args.budget_s,
        ga=GaConfig(population=args.ga_population, generations=args.ga_generations)
        if args.ga
        else None,
        seed=args.seed,
        n_samples=ds.manifest.n_samples,
        sample_rate_hz=ds.manifest.sample_rate_hz,
        scale_p=args.pad_scale,
    )
    indices = [args.index] if args.index is not None else list(range(len(ds)))
    fitted = []
    models_payload = []
    for i in indices:
        result = fit_sds(ds.spectrum(i), config)
        signal = render_sds(result.model)
        fitted.append((signal, srs_filterbank(signal, grid, args.pad_scale)))
        models_payload.append(
            {
                "record": i,
                "loss": result.loss,
                "n_evaluations": result.trace.n_evaluations,
                "elapsed_s": result.trace.elapsed_s,
                "model": result.model.to_dict(),
                "ga": result.trace.ga,
            }
        )

    manifest = DatasetManifest(
        count=len(indices),
        n_samples=config.n_samples,
        sample_rate_hz=config.sample_rate_hz,
        grid_f_min_hz=grid.f_min_hz,
        grid_f_max_hz=grid.f_max_hz,
        grid_count=len(grid),
        damping_ratio=grid.damping_ratio,
        seed=args.seed,
        pad_scale=args.pad_scale,
    )
    write_dataset(args.out, iter(fitted), manifest)
    if args.models:
        _write_json(
            {
                "config": {
                    "m_atoms": config.m_atoms,
                    "max_iters": config.max_iters,
                    "restarts": config.restarts,
                    "seed": config.seed,
                    "ga": models_payload[0]["ga"] if models_payload else None,
                },
                "fits": models_payload,
            },
            args.models,
        )
    losses = [m["loss"] for m in models_payload]
    print(
        f"fitted {len(indices)} record(s) to {args.out}; "
        f"median RMSLE {float(np.median(losses)):.4f}"
    )
    return 0


def _cmd_losses_eval(args) -> int:
    ds_target = read_dataset(args.target)
    ds_pred = read_dataset(args.pred)
    grid = _grid_from_args(args, ds_target.manifest)
    weights = LossWeights()
    if args.weights:
        with open(args.weights, "r", encoding="utf-8") as fh:
            weights = LossWeights(**json.load(fh))
    latent = None
    if args.latent:
        with open(args.latent, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        latent = LatentStats(np.asarray(raw["mu"]), np.asarray(raw["log_var"]))
    result = evaluate_losses(
        ds_target.signal(args.target_index),
        ds_pred.signal(args.pred_index),
        grid,
        weights=weights,
        latent=latent,
        scale_p=args.pad_scale,
    )
    _write_json(result, args.out)
    return 0


def _cmd_eval(args) -> int:
    targets = read_dataset(args.targets)
    candidates = read_dataset(args.candidates)
    baseline = read_dataset(args.baseline) if args.baseline else None
    grid = _grid_from_args(args, targets.manifest)
    report = evaluate_holdout(targets, candidates, baseline, grid, args.pad_scale)
    _write_json(report.to_dict(), args.report)
    if args.csv:
        write_report_csv(report, args.csv)
    print(
        f"evaluated {len(targets)} samples: median RMSLE "
        f"{report.summary['median']:.4f}, within 3 dB {report.db_within_3:.3f}"
    )
    return 0


def _cmd_aggregate(args) -> int:
    ds = read_dataset(args.infile)
    ensemble = SpectrumEnsemble(tuple(ds.spectrum(i) for i in range(len(ds))))
    if args.mode == "mean":
        spectrum = aggregate_mean(ensemble)
    else:
        spectrum = aggregate_upper_tol(ensemble, args.k)
    _write_json(
        {
            "mode": args.mode,
            "k": args.k if args.mode == "upper-tol" else None,
            "freqs_hz": ensemble.grid.freqs_hz.tolist(),
            "damping_ratio": ensemble.grid.damping_ratio,
            "values": spectrum.values.tolist(),
        },
        args.out,
    )
    return 0


def _cmd_export_csv(args) -> int:
    export_spectra_csv(read_dataset(args.infile), args.out)
    print(f"exported spectra to {args.out}")
    return 0


def _cmd_bench(args) -> int:
    results = run_benchmark(n_samples=args.n_samples, repeats=args.repeats)
    if args.json:
        _write_json(results, None)
    else:
        print(format_benchmark(results))
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "srs": _cmd_srs,
    "sds-fit": _cmd_sds_fit,
    "losses-eval": _cmd_losses_eval,
    "eval": _cmd_eval,
    "aggregate": _cmd_aggregate,
    "export-csv": _cmd_export_csv,
    "bench": _cmd_bench,
}


def _emit_error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        threads = args.threads
        if threads is None:
            env = os.environ.get("SRSKIT_THREADS", "").strip()
            threads = int(env) if env else None
        if threads is not None:
            _kernels.set_threads(threads)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        _emit_error("usage", str(exc))
        return 1
    except BudgetExhaustedError as exc:
        _emit_error("budget", str(exc))
        return 3
    except (DatasetFormatError, ValueError, OSError, KeyError, IndexError) as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
