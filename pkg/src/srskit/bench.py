"""Timing harness for the hot operations.

Times the SRS filter bank on both kernel paths (numba and the
NumPy/SciPy fallback), the analytical oracle, SDS rendering, and one
small SDS fit.  Used by ``srskit bench`` to support speed comparisons
between fitting and direct generation.
"""

from __future__ import annotations

import time

import numpy as np

from . import _kernels
from .sds import FitConfig, fit_sds, render_sds, SdsModel
from .srs import log_frequency_grid, padding_length, srs_analytical, srs_filterbank
from .synth import GenParams, generate_shock


def _time(fn, repeats: int) -> float:
    fn()  # warm-up (JIT compilation, caches)
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def run_benchmark(
    n_samples: int = 9000,
    sample_rate_hz: float = 32768.0,
    repeats: int = 20,
    fit_evals: int = 120,
) -> dict:
    grid = log_frequency_grid(10.0, sample_rate_hz / 8.0, 100)
    params = GenParams(n_samples=n_samples, sample_rate_hz=sample_rate_hz, seed=7)
    signal, _ = generate_shock(params, 0)
    pad = padding_length(sample_rate_hz, grid.f_min_hz, grid.damping_ratio, 3.0)
    coeffs = _kernels.sdof_absacc_coeffs(grid.freqs_hz, grid.damping_ratio, sample_rate_hz)

    results = {"backend": _kernels.active_backend(), "n_samples": n_samples}

    t_fallback = _time(
        lambda: _kernels._np_filterbank_peaks(signal.samples, pad, *coeffs), repeats
    )
    results["srs_filterbank_numpy_ms"] = t_fallback * 1e3
    if _kernels.NUMBA_ENABLED:
        t_numba = _time(
            lambda: _kernels._nb_filterbank_peaks(signal.samples, pad, *coeffs), repeats
        )
        results["srs_filterbank_numba_ms"] = t_numba * 1e3
        results["numba_speedup"] = t_fallback / t_numba

    results["srs_analytical_ms"] = _time(lambda: srs_analytical(signal, grid), 1) * 1e3

    rng = np.random.default_rng(3)
    atoms = np.column_stack(
        [
            rng.uniform(0.5, 5.0, 12),
            rng.uniform(10.0, 300.0, 12),
            rng.uniform(20.0, sample_rate_hz / 8.0, 12),
            rng.uniform(0.0, 2 * np.pi, 12),
        ]
    )
    model = SdsModel(atoms, n_samples, sample_rate_hz)
    results["render_sds_ms"] = _time(lambda: render_sds(model), repeats) * 1e3

    target = srs_filterbank(signal, grid)
    config = FitConfig(
        m_atoms=4,
        max_iters=fit_evals,
        restarts=1,
        seed=1,
        n_samples=n_samples,
        sample_rate_hz=sample_rate_hz,
    )
    start = time.perf_counter()
    fit = fit_sds(target, config)
    results["fit_sds_wall_s"] = time.perf_counter() - start
    results["fit_sds_evaluations"] = fit.trace.n_evaluations
    results["fit_sds_final_loss"] = fit.loss

    best_ms = results.get("srs_filterbank_numba_ms", results["srs_filterbank_numpy_ms"])
    results["srs_throughput_signals_per_s"] = 1e3 / best_ms
    return results


def format_benchmark(results: dict) -> str:
    lines = [f"kernel backend: {results['backend']} (n_samples={results['n_samples']})"]
    lines.append(
        f"srs_filterbank[numpy]   : {results['srs_filterbank_numpy_ms']:9.3f} ms/signal"
    )
    if "srs_filterbank_numba_ms" in results:
        lines.append(
            f"srs_filterbank[numba]   : {results['srs_filterbank_numba_ms']:9.3f} ms/signal"
            f"  ({results['numba_speedup']:.1f}x vs numpy)"
        )
    lines.append(f"srs_analytical (oracle) : {results['srs_analytical_ms']:9.3f} ms/signal")
    lines.append(f"render_sds (12 atoms)   : {results['render_sds_ms']:9.3f} ms/signal")
    lines.append(
        f"fit_sds (4 atoms, {results['fit_sds_evaluations']} evals): "
        f"{results['fit_sds_wall_s']:.2f} s wall, final RMSLE {results['fit_sds_final_loss']:.4f}"
    )
    lines.append(
        f"SRS throughput          : {results['srs_throughput_signals_per_s']:9.1f} signals/s"
    )
    return "\n".join(lines)
