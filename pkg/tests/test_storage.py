"""Tests for the CSV sample store and artifact writers."""

import numpy as np
import pytest
from src.wtopics.errors import DataError
from src.wtopics.inference.hmc import HmcConfig, SampleSet
from src.wtopics.storage.csv_store import CsvSampleStore, read_json, write_json


def _samples(seed=0, chains=2, retained=50, dim=3):
    rng = np.random.default_rng(seed)
    config = HmcConfig(iterations=retained + 25, burn_in=25, chains=chains, seed=seed)
    return SampleSet(
        draws=rng.normal(size=(chains, retained, dim)) * 10.0 ** rng.integers(-8, 8),
        log_post=-np.abs(rng.normal(size=(chains, retained))) * 1e3,
        accept_prob=rng.uniform(size=(chains, retained)),
        divergent=rng.uniform(size=(chains, retained)) < 0.1,
        step_size=np.array([0.123456789, 1.0 / 3.0])[:chains],
        param_names=[f"p{k}" for k in range(dim)],
        config=config,
    )


def test_round_trip_is_exact(tmp_path):
    samples = _samples()
    store = CsvSampleStore(tmp_path / "chains")
    assert not store.exists()
    store.save(samples, {"model": "test"})
    assert store.exists()

    loaded = store.load()
    assert np.array_equal(loaded.draws, samples.draws)
    assert np.array_equal(loaded.log_post, samples.log_post)
    assert np.array_equal(loaded.accept_prob, samples.accept_prob)
    assert np.array_equal(loaded.divergent, samples.divergent)
    assert np.array_equal(loaded.step_size, samples.step_size)
    assert loaded.param_names == samples.param_names
    assert loaded.config == samples.config


def test_chain_file_layout(tmp_path):
    store = CsvSampleStore(tmp_path)
    store.save(_samples(dim=2, retained=10), {})
    header, first = (tmp_path / "chain_0.csv").read_text().splitlines()[:2]
    assert header == "iteration,param_0,param_1,log_post"
    assert first.startswith("25,")
    header = (tmp_path / "sampler_1.csv").read_text().splitlines()[0]
    assert header == "iteration,accept_prob,divergent"

    manifest = read_json(tmp_path / "manifest.json")
    assert manifest["chains"] == 2
    assert manifest["retained"] == 10
    assert manifest["diagnostics"]["max_rhat"] > 0
    assert "inv_mass" not in manifest


def test_missing_chain_file(tmp_path):
    store = CsvSampleStore(tmp_path)
    store.save(_samples(), {})
    (tmp_path / "chain_1.csv").unlink()
    assert not store.exists()
    with pytest.raises(DataError):
        store.load()


def test_write_json(tmp_path):
    path = write_json(tmp_path / "out" / "a.json", {"x": np.float64(0.5), "n": np.int64(3)})
    text = path.read_text()
    assert text.endswith("}\n")
    assert read_json(path) == {"x": 0.5, "n": 3}


def test_read_json_errors(tmp_path):
    with pytest.raises(DataError, match="not found"):
        read_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    with pytest.raises(DataError):
        read_json(bad)
