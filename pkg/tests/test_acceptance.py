"""Acceptance gate: one test per release criterion, each printing a
PASS/FAIL line with the measured value.  Run with ``pytest -s
tests/test_acceptance.py`` to see the lines as they complete.

The heavy criteria (padding study, oracle corpus, SDS corpus,
determinism) run at the full operating point: 9000 samples at 32768 Hz,
100 log-spaced frequencies from 10 to 4096 Hz, damping 0.03.
"""

import hashlib
import math

import numpy as np

from srskit import (
    FitConfig,
    GenParams,
    db_error,
    fit_sds,
    generate_dataset,
    generate_shock,
    log_frequency_grid,
    normalize_pair,
    padding_length,
    rmsle,
    sampling_error_bound,
    srs_analytical,
    srs_filterbank,
)

GRID = log_frequency_grid(10.0, 4096.0, 100)
FS = 32768.0


def _report(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'}: {name} ({detail})", flush=True)
    assert ok, f"{name}: {detail}"


class TestAcceptance:
    def test_c1_sampling_error_bound(self):
        value = sampling_error_bound(32768, 4096)
        ok = abs(value - 7.61) <= 0.01
        _report("sampling-error bound at fs/8", ok, f"{value:.4f}%")

    def test_c2_padding_constants(self):
        full = padding_length(32768, 10, 0.03, 1)
        scaled = padding_length(32768, 10, 0.03, 3)
        ok = full == 1640 and scaled == 547
        _report("padding constants", ok, f"L={full}, L/p={scaled}")

    def test_c3_padding_truncation_study(self):
        # 1000 generated shocks: max-normalized spectra move by less than
        # 1e-4 MAE when padding shrinks from p=1 to p=3
        params = GenParams(seed=31415)
        worst = 0.0
        for k in range(1000):
            sig, _ = generate_shock(params, k)
            full = srs_filterbank(sig, GRID, scale_p=1.0)
            short = srs_filterbank(sig, GRID, scale_p=3.0)
            mae = float(
                np.mean(
                    np.abs(
                        short.values / short.values.max()
                        - full.values / full.values.max()
                    )
                )
            )
            worst = max(worst, mae)
        ok = worst < 1e-4
        _report("padding truncation study (1000 shocks)", ok, f"worst MAE {worst:.3e}")

    def test_c4_oracle_equivalence(self):
        # filter bank vs analytical convolution over 100 synthetic shocks,
        # all grid points at or below fs/8
        params = GenParams(seed=27182)
        mask = GRID.freqs_hz <= FS / 8.0
        worst = 0.0
        for k in range(100):
            sig, _ = generate_shock(params, k)
            fast = srs_filterbank(sig, GRID)
            oracle = srs_analytical(sig, GRID)
            rel = np.abs(oracle.values - fast.values)[mask] / fast.values[mask]
            worst = max(worst, float(rel.max()))
        ok = worst < 0.01
        _report(
            "oracle equivalence (100 shocks, f <= fs/8)", ok, f"worst rel {worst:.3e}"
        )

    def test_c5_homogeneity_suite(self):
        params = GenParams(seed=1618)
        sig, _ = generate_shock(params, 0)
        base = srs_filterbank(sig, GRID)

        # a = 2 isolates the operator: dyadic scaling commutes with every
        # IEEE multiply, so any deviation would be an implementation bug
        dyadic = srs_filterbank(sig.scaled(2.0), GRID)
        op_homogeneity = float(
            np.max(np.abs(dyadic.values - 2.0 * base.values) / (2.0 * base.values))
        )
        # a = 2.5 rounds the input signal itself (one ulp per element)
        # before the filter runs; amplified by Q at frequencies where the
        # response is far below the signal peak, that quantization floors
        # near 3e-12 for this record length, independent of implementation
        scaled = srs_filterbank(sig.scaled(2.5), GRID)
        homogeneity = float(np.max(np.abs(scaled.values - 2.5 * base.values)
                                   / (2.5 * base.values)))

        rmsle_val = rmsle(base, base.scaled(10.0))
        db = db_error(base, base.scaled(2.0))
        db_dev = float(np.max(np.abs(db - 20.0 * math.log10(2.0))))

        norm_sig, _, scale = normalize_pair(sig, base)
        back = norm_sig.samples * scale
        round_trip = float(np.max(np.abs(back - sig.samples) /
                                  np.maximum(np.abs(sig.samples), 1e-300)))

        ok = (
            op_homogeneity <= 1e-12
            and homogeneity <= 1e-11
            and abs(rmsle_val - 1.0) <= 1e-9
            and db_dev <= 1e-6
            and round_trip <= 1e-12
        )
        _report(
            "homogeneity suite",
            ok,
            f"SRS a=2 {op_homogeneity:.1e}, a=2.5 {homogeneity:.1e}, "
            f"RMSLE(10x) {rmsle_val:.12f}, dB(2x) dev {db_dev:.1e}, "
            f"round-trip {round_trip:.1e}",
        )

    def test_c6a_sds_self_consistency(self):
        from srskit import SdsModel, render_sds

        model = SdsModel(np.array([[3.0, 40.0, 700.0, 1.1]]), 9000, FS)
        target = srs_filterbank(render_sds(model), GRID)
        result = fit_sds(target, FitConfig(m_atoms=1, max_iters=350, restarts=4, seed=9))
        ok = result.loss < 0.05
        _report("SDS self-consistency (M=1)", ok, f"RMSLE {result.loss:.4f}")

    def test_c6b_sds_corpus_median(self):
        # desk-scale corpus: 100 synthetic targets, default config
        # (M=12, 8 restarts); achieved median recorded
        params = GenParams(seed=2718)
        losses = []
        for k in range(100):
            sig, _ = generate_shock(params, k)
            target = srs_filterbank(sig, GRID)
            result = fit_sds(target, FitConfig(seed=k))
            losses.append(result.loss)
        median = float(np.median(losses))
        ok = median <= 0.25
        _report(
            "SDS corpus median (100 targets, M=12, 8 restarts)",
            ok,
            f"median RMSLE {median:.4f}, mean {np.mean(losses):.4f}, "
            f"max {np.max(losses):.4f}",
        )

    def test_c7_determinism(self, tmp_path):
        params = GenParams(seed=4242)
        digests = []
        for name in ("d1.srs", "d2.srs"):
            path = tmp_path / name
            generate_dataset(params, 50, GRID, path)
            digests.append(hashlib.sha256(path.read_bytes()).hexdigest())
        dataset_ok = digests[0] == digests[1]

        sig, _ = generate_shock(params, 0)
        target = srs_filterbank(sig, GRID)
        config = FitConfig(m_atoms=4, max_iters=80, restarts=2, seed=77)
        fit_a = fit_sds(target, config)
        fit_b = fit_sds(target, config)
        fit_ok = (
            np.array_equal(fit_a.model.atoms, fit_b.model.atoms)
            and fit_a.loss == fit_b.loss
        )
        ok = dataset_ok and fit_ok
        _report(
            "determinism",
            ok,
            f"dataset digests equal: {dataset_ok}, fit results equal: {fit_ok}",
        )

    def test_c8_metric_properties_substitute_for_full_scale_training(self):
        # the published CVAE error statistics need half a million training
        # signals; what is asserted here instead is the correctness of the
        # metrics that would score such a model
        params = GenParams(seed=5555)
        sig_a, _ = generate_shock(params, 0)
        sig_b, _ = generate_shock(params, 1)
        sa = srs_filterbank(sig_a, GRID)
        sb = srs_filterbank(sig_b, GRID)
        db = db_error(sa, sb)
        relation = abs(float(np.sqrt(np.mean(db**2))) - 20.0 * rmsle(sa, sb))
        ok = relation <= 1e-9
        _report(
            "metric correctness stands in for full-scale training",
            ok,
            f"|sqrt(mean dB^2) - 20*RMSLE| = {relation:.2e}",
        )
