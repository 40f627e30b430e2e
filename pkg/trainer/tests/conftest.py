import json
import subprocess

import pytest

TOY_PARAMS = {
    "freq_range_hz": [10.0, 1024.0],
    "n_samples": 2048,
    "sample_rate_hz": 8192.0,
}
GRID = "10,1024,40"


def srskit(*args):
    """Invoke the generator toolkit CLI (the only coupling to it)."""
    result = subprocess.run(
        ["srskit", *map(str, args)], capture_output=True, text=True
    )
    if result.returncode != 0:
        raise RuntimeError(f"srskit {' '.join(map(str, args))} failed: {result.stderr}")
    return result.stdout


@pytest.fixture(scope="session")
def params_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "toy_params.json"
    path.write_text(json.dumps(TOY_PARAMS))
    return str(path)


@pytest.fixture(scope="session")
def fixture_pairs(tmp_path_factory, params_file):
    """Small dataset of shocks used as (target, pred) fixture pairs."""
    path = tmp_path_factory.mktemp("data") / "pairs.srs"
    srskit("gen", "--count", 4, "--seed", 41, "--out", path, "--grid", GRID,
           "--params", params_file)
    return str(path)


@pytest.fixture(scope="session")
def train_dataset_small(tmp_path_factory, params_file):
    """200 normalized records for functional training tests."""
    path = tmp_path_factory.mktemp("data") / "train200.srs"
    srskit("gen", "--count", 200, "--seed", 51, "--out", path, "--grid", GRID,
           "--params", params_file, "--normalize")
    return str(path)


@pytest.fixture(scope="session")
def quick_checkpoint(tmp_path_factory, train_dataset_small):
    """A briefly trained model for generation/property tests."""
    from shock_cvae import CvaeConfig, train

    out = tmp_path_factory.mktemp("ckpt") / "quick"
    config = CvaeConfig(
        latent_dim=32,
        epochs=4,
        batch_size=32,
        learning_rate=1e-3,
        seed=7,
        dataset_path=train_dataset_small,
        n_samples=2048,
        condition_dim=40,
    )
    train(config, str(out))
    return str(out)
