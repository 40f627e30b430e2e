"""Evaluation metrics and spectrum aggregation.

RMSLE (base-10) with per-sample win rates, per-frequency dB error with
ECDF threshold fractions, and Mean / upper-tolerance target-spectrum
construction over spectrum ensembles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import ShockDataset
from .sds import rmsle_loss
from .srs import DEFAULT_PAD_SCALE, srs_filterbank
from .types import FrequencyGrid, Spectrum

LOG_EPS = 1e-12

# Base-10 RMSLE between two spectra; single shared implementation with the
# SDS objective, re-exported here for reporting.
rmsle = rmsle_loss


def db_error(target: Spectrum, pred: Spectrum) -> np.ndarray:
    """Signed per-frequency error 20*log10(pred/target), in dB."""
    if not target.same_grid(pred):
        raise ValueError("target and pred spectra are on different grids")
    return 20.0 * np.log10(
        np.maximum(pred.values, LOG_EPS) / np.maximum(target.values, LOG_EPS)
    )


def win_rate(rmsle_a, rmsle_b) -> float:
    """Fraction of paired cases where method A has strictly lower error."""
    a = np.asarray(rmsle_a, dtype=np.float64)
    b = np.asarray(rmsle_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise ValueError("rmsle sequences must be equal-length, non-empty 1-D")
    return float(np.mean(a < b))


@dataclass(frozen=True)
class SpectrumEnsemble:
    """J spectra stacked on one shared grid."""

    spectra: tuple

    def __post_init__(self):
        spectra = tuple(self.spectra)
        if not spectra:
            raise ValueError("ensemble must contain at least one spectrum")
        first = spectra[0]
        for s in spectra[1:]:
            if not first.same_grid(s):
                raise ValueError("ensemble spectra must share one grid")
        object.__setattr__(self, "spectra", spectra)

    @property
    def grid(self) -> FrequencyGrid:
        return self.spectra[0].grid

    def matrix(self) -> np.ndarray:
        return np.stack([s.values for s in self.spectra])

    def __len__(self) -> int:
        return len(self.spectra)


def aggregate_mean(ensemble: SpectrumEnsemble) -> Spectrum:
    """Elementwise arithmetic mean across realizations."""
    return Spectrum(ensemble.matrix().mean(axis=0), ensemble.grid)


def aggregate_upper_tol(ensemble: SpectrumEnsemble, k_factor: float) -> Spectrum:
    """Log-normal one-sided upper bound: 10^(mean + k*std) of log10 values.

    Uses population (n) normalization for the standard deviation.  The
    k-factor is caller-supplied; no tolerance-interval tables are applied.
    """
    if len(ensemble) < 2:
        raise ValueError("upper-tolerance aggregation needs at least 2 spectra")
    if k_factor < 0:
        raise ValueError("k_factor must be non-negative (0 gives the geometric mean)")
    logs = np.log10(np.maximum(ensemble.matrix(), LOG_EPS))
    bound = logs.mean(axis=0) + k_factor * logs.std(axis=0, ddof=0)
    return Spectrum(np.power(10.0, bound), ensemble.grid)


@dataclass
class EvalReport:
    """Hold-out evaluation result.

    ``summary`` statistics use population standard deviation and
    linear-interpolation quantiles.  ``db_errors`` is flat over
    (samples x frequencies).
    """

    per_sample_rmsle: np.ndarray
    summary: dict
    db_errors: np.ndarray
    db_within_1: float
    db_within_3: float
    win_rate_vs_baseline: Optional[float] = None
    baseline_rmsle: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        out = {
            "per_sample_rmsle": self.per_sample_rmsle.tolist(),
            "summary": self.summary,
            "db_within_1": self.db_within_1,
            "db_within_3": self.db_within_3,
            "n_samples": int(self.per_sample_rmsle.size),
            "n_db_points": int(self.db_errors.size),
        }
        if self.win_rate_vs_baseline is not None:
            out["win_rate_vs_baseline"] = self.win_rate_vs_baseline
            out["baseline_per_sample_rmsle"] = self.baseline_rmsle.tolist()
        return out


def summarize(values: np.ndarray) -> dict:
    values = np.asarray(values, dtype=np.float64)
    q025, q975 = np.quantile(values, [0.025, 0.975])
    return {
        "mean": float(values.mean()),
        "median": float(np.median(values)),
        "std": float(values.std(ddof=0)),
        "min": float(values.min()),
        "max": float(values.max()),
        "q025": float(q025),
        "q975": float(q975),
    }


def _check_comparable(targets: ShockDataset, candidates: ShockDataset, label: str) -> None:
    if len(candidates) != len(targets):
        raise ValueError(
            f"count mismatch: {len(targets)} targets vs {len(candidates)} {label}"
        )
    if candidates.manifest.sample_rate_hz != targets.manifest.sample_rate_hz:
        raise ValueError(f"sample rate mismatch between targets and {label}")
    tm, cm = targets.manifest, candidates.manifest
    if (tm.grid_f_min_hz, tm.grid_f_max_hz, tm.grid_count, tm.damping_ratio) != (
        cm.grid_f_min_hz,
        cm.grid_f_max_hz,
        cm.grid_count,
        cm.damping_ratio,
    ):
        raise ValueError(f"grid mismatch between targets and {label}")


def evaluate_holdout(
    targets: ShockDataset,
    candidates_a: ShockDataset,
    candidates_b: Optional[ShockDataset],
    grid: FrequencyGrid,
    scale_p: float = DEFAULT_PAD_SCALE,
) -> EvalReport:
    """Score candidate reconstructions against hold-out targets.

    Every spectrum (target and candidate) is recomputed from its stored
    signal through the same filter path, so identical signals score
    exactly zero.  When a baseline is supplied, the win rate is the
    fraction of samples where A's RMSLE is strictly below B's.
    """
    _check_comparable(targets, candidates_a, "candidates")
    if candidates_b is not None:
        _check_comparable(targets, candidates_b, "baseline candidates")

    n = len(targets)
    rmsle_a = np.empty(n)
    rmsle_b = np.empty(n) if candidates_b is not None else None
    db_flat = np.empty((n, len(grid)))
    for j in range(n):
        s_target = srs_filterbank(targets.signal(j), grid, scale_p)
        s_a = srs_filterbank(candidates_a.signal(j), grid, scale_p)
        rmsle_a[j] = rmsle(s_target, s_a)
        db_flat[j] = db_error(s_target, s_a)
        if candidates_b is not None:
            s_b = srs_filterbank(candidates_b.signal(j), grid, scale_p)
            rmsle_b[j] = rmsle(s_target, s_b)

    db_flat = db_flat.ravel()
    abs_db = np.abs(db_flat)
    return EvalReport(
        per_sample_rmsle=rmsle_a,
        summary=summarize(rmsle_a),
        db_errors=db_flat,
        db_within_1=float(np.mean(abs_db <= 1.0)),
        db_within_3=float(np.mean(abs_db <= 3.0)),
        win_rate_vs_baseline=None if rmsle_b is None else win_rate(rmsle_a, rmsle_b),
        baseline_rmsle=rmsle_b,
    )


def write_report_csv(report: EvalReport, directory) -> None:
    """Plot-ready CSV artifacts: per-sample RMSLE, dB histogram, |dB| ECDF."""
    import os

    os.makedirs(directory, exist_ok=True)

    with open(os.path.join(directory, "rmsle.csv"), "w", encoding="utf-8") as fh:
        fh.write("sample,rmsle_a" + (",rmsle_b\n" if report.baseline_rmsle is not None else "\n"))
        for j, v in enumerate(report.per_sample_rmsle):
            if report.baseline_rmsle is not None:
                fh.write(f"{j},{float(v)!r},{float(report.baseline_rmsle[j])!r}\n")
            else:
                fh.write(f"{j},{float(v)!r}\n")

    lo = float(np.floor(report.db_errors.min()))
    hi = max(float(np.ceil(report.db_errors.max())), lo + 0.25)
    edges = np.arange(lo, hi + 0.25, 0.25)
    counts, edges = np.histogram(report.db_errors, bins=edges)
    with open(os.path.join(directory, "db_hist.csv"), "w", encoding="utf-8") as fh:
        fh.write("bin_left,bin_right,count\n")
        for left, right, c in zip(edges[:-1], edges[1:], counts):
            fh.write(f"{float(left)!r},{float(right)!r},{int(c)}\n")

    abs_db = np.sort(np.abs(report.db_errors))
    probe = np.unique(np.concatenate([np.arange(0.0, 24.0 + 0.05, 0.05), [1.0, 3.0]]))
    frac = np.searchsorted(abs_db, probe, side="right") / abs_db.size
    with open(os.path.join(directory, "db_ecdf.csv"), "w", encoding="utf-8") as fh:
        fh.write("abs_db,fraction\n")
        for x, f in zip(probe, frac):
            fh.write(f"{float(x)!r},{float(f)!r}\n")
