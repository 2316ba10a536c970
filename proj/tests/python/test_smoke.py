import json
import struct

import numpy as np
import pytest

import sib


def write_idx(directory, prefix, n, seed):
    rng = np.random.default_rng(seed)
    labels = np.arange(n, dtype=np.uint8) % 10
    images = rng.integers(0, 40, size=(n, 28, 28), dtype=np.uint8)
    for i, c in enumerate(labels):
        r0, c0 = 2 + (c // 5) * 14, 1 + (c % 5) * 5
        images[i, r0 : r0 + 8, c0 : c0 + 6] = 230
    (directory / f"{prefix}-images-idx3-ubyte").write_bytes(struct.pack(">IIII", 0x803, n, 28, 28) + images.tobytes())
    (directory / f"{prefix}-labels-idx1-ubyte").write_bytes(struct.pack(">II", 0x801, n) + labels.tobytes())


@pytest.fixture
def tiny(tmp_path):
    data = tmp_path / "data"
    data.mkdir()
    write_idx(data, "train", 300, 1)
    write_idx(data, "t10k", 60, 2)

    def make(kind):
        return {
            "seed": 2,
            "out_dir": str(tmp_path / kind),
            "data": {"dataset": "mnist", "mnist_dir": str(data)},
            "victim": {"kind": kind, "hidden_dim": 24, "epochs": 2, "steps": 5},
            "attack": {
                "total_batches": 8,
                "batch_size": 8,
                "noise_dim": 6,
                "generator_hidden": [16],
                "surrogate_hidden": [16],
                "labels": [1, 2],
            },
            "eval": {"fidelity_batches": 2, "fidelity_batch_size": 8, "samples": 10},
        }

    return tmp_path, make


def test_version():
    assert sib.__version__ == "0.1.0"


def test_config_defaults_and_hash():
    full = sib.materialize_config({})
    assert full["victim"]["hidden_dim"] == 3000
    assert full["attack"]["budget"] == 1_280_000
    assert full["attack"]["labels"] == list(range(10))
    assert sib.config_hash(full) == sib.config_hash({})
    assert sib.config_hash({"seed": 1}) != sib.config_hash({})


def test_config_error_suggests_key():
    with pytest.raises(sib.ConfigError, match='did you mean "hidden_dim"'):
        sib.materialize_config({"victim": {"hiden_dim": 10}})
    with pytest.raises(sib.Error):
        sib.materialize_config(json.dumps({"eval": {"samples": 0}}))


def test_equilibrium_arithmetic():
    assert sib.update_k(0.0, 0.001, 0.5, 1.0, 0.0) == pytest.approx(0.0005)
    assert sib.update_k(0.0, 0.001, 0.5, 0.0, 1.0) == 0.0
    assert sib.update_k(1.0, 0.001, 0.5, 10.0, 0.0) == 1.0
    assert sib.m_global(0.9, 1.1) == pytest.approx(1.55)
    assert sib.m_global(0.9, 1.1, mode="as-written") == pytest.approx(0.25)


def test_fidelity_closed_form():
    onehot = np.eye(10, dtype=np.float32)[:4]
    uniform = np.full((4, 10), 0.1, dtype=np.float32)
    assert sib.fidelity_of(onehot, uniform) == pytest.approx(0.82, abs=1e-6)
    assert sib.fidelity_of(onehot, onehot) == 1.0
    with pytest.raises(sib.DimensionError):
        sib.fidelity_of(onehot, uniform[:3])


def test_rate_encode_extremes():
    image = np.array([0.0, 1.0, 0.5], dtype=np.float32)
    train = sib.rate_encode(image, 200, seed=3)
    assert train.shape == (200, 3)
    assert train[:, 0].sum() == 0
    assert train[:, 1].sum() == 200
    assert 60 < train[:, 2].sum() < 140
    assert np.array_equal(train, sib.rate_encode(image, 200, seed=3))


def test_labels():
    assert sib.parse_label_list("0-2,7") == [0, 1, 2, 7]


def test_lifecycle(tiny):
    root, make = tiny
    ann, snn = make("ann"), make("snn")
    result = sib.train_target(ann)
    assert 0.0 <= result["test_accuracy"] <= 1.0
    sib.train_target(snn)
    jobs = sib.attack(ann, parallel=2)
    assert [j["label"] for j in jobs] == [1, 2]
    assert all(j["queries_used"] == 8 * 2 * 8 for j in jobs)
    sib.attack(snn)
    report = sib.evaluate([ann, snn], root / "report")
    assert [r["model_type"] for r in report["reports"]] == ["ANN", "SNN"]
    assert report["reports"][0]["m_global_sd"] is None
    assert (root / "report" / "report.csv").read_text() == report["csv"]
    grids = sib.reconstruct([ann, snn], root / "report")
    assert len(grids) == 1
    assert open(grids[0], "rb").read(2) == b"P5"
    manifest = json.loads((root / "ann" / "manifest-attack.json").read_text())
    assert manifest["config_hash"] == sib.config_hash(ann)


def test_missing_checkpoint_is_a_data_error(tiny):
    _, make = tiny
    with pytest.raises(sib.DataError, match="checkpoint not found"):
        sib.attack(make("ann"))
