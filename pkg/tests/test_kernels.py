"""Cross-checks between the numba kernels and the NumPy/SciPy fallback."""

import numpy as np
import pytest

from srskit import _kernels
from srskit import generate_shock

needs_numba = pytest.mark.skipif(
    not _kernels.NUMBA_ENABLED, reason="numba backend not active"
)


@pytest.fixture
def shock(small_params):
    sig, _ = generate_shock(small_params, 0)
    return sig


@pytest.fixture
def coeffs(small_grid, small_params):
    return _kernels.sdof_absacc_coeffs(
        small_grid.freqs_hz, small_grid.damping_ratio, small_params.sample_rate_hz
    )


@needs_numba
class TestBackendAgreement:
    def test_peaks_agree(self, shock, coeffs):
        nb = _kernels._nb_filterbank_peaks(shock.samples, 100, *coeffs)
        np_ = _kernels._np_filterbank_peaks(shock.samples, 100, *coeffs)
        np.testing.assert_allclose(nb, np_, rtol=1e-9)

    def test_responses_agree(self, shock, coeffs):
        nb = _kernels._nb_filterbank_responses(shock.samples, 50, *coeffs)
        np_ = _kernels._np_filterbank_responses(shock.samples, 50, *coeffs)
        assert nb.shape == np_.shape == (coeffs[0].size, len(shock) + 50)
        np.testing.assert_allclose(nb, np_, atol=1e-9 * np.abs(np_).max())

    def test_render_agrees(self):
        amps = np.array([1.0, 0.5])
        decays = np.array([10.0, 40.0])
        freqs = np.array([100.0, 700.0])
        phases = np.array([0.2, 4.0])
        nb = _kernels._nb_render_decayed_sines(amps, decays, freqs, phases, 2048, 1 / 8192.0)
        np_ = _kernels._np_render_decayed_sines(amps, decays, freqs, phases, 2048, 1 / 8192.0)
        np.testing.assert_allclose(nb, np_, atol=1e-12)

    def test_repeat_runs_bit_identical(self, shock, coeffs):
        a = _kernels._nb_filterbank_peaks(shock.samples, 100, *coeffs)
        b = _kernels._nb_filterbank_peaks(shock.samples, 100, *coeffs)
        assert np.array_equal(a, b)

    def test_results_independent_of_thread_count(self, shock, coeffs):
        import numba

        before = numba.get_num_threads()
        try:
            _kernels.set_threads(1)
            one = _kernels._nb_filterbank_peaks(shock.samples, 100, *coeffs)
            _kernels.set_threads(2)
            two = _kernels._nb_filterbank_peaks(shock.samples, 100, *coeffs)
        finally:
            numba.set_num_threads(before)
        assert np.array_equal(one, two)


def test_backend_reports_name():
    assert _kernels.active_backend() in ("numba", "numpy")


def test_env_flag_selects_fallback(small_params, small_grid, tmp_path):
    # fallback path produces a valid spectrum in a fresh interpreter
    import json
    import subprocess
    import sys

    code = (
        "import json, numpy as np\n"
        "from srskit import GenParams, Signal, log_frequency_grid, srs_filterbank, active_backend\n"
        f"params = GenParams.from_dict(json.loads('{json.dumps(small_params.to_dict())}'))\n"
        "from srskit import generate_shock\n"
        "sig, _ = generate_shock(params, 0)\n"
        "grid = log_frequency_grid(10.0, 1024.0, 40)\n"
        "spec = srs_filterbank(sig, grid)\n"
        "print(json.dumps({'backend': active_backend(), 'head': spec.values[:4].tolist()}))\n"
    )
    env = {"SRSKIT_NO_NUMBA": "1", "PATH": "/usr/bin:/bin"}
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True
    )
    payload = json.loads(out.stdout.strip().splitlines()[-1])
    assert payload["backend"] == "numpy"

    from srskit import log_frequency_grid, srs_filterbank, generate_shock

    sig, _ = generate_shock(small_params, 0)
    here = srs_filterbank(sig, log_frequency_grid(10.0, 1024.0, 40))
    np.testing.assert_allclose(payload["head"], here.values[:4], rtol=1e-9)
