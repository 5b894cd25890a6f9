import numpy as np
import pytest

from netite import io as nio
from netite.linalg import make_rng
from netite.model import init_params
from netite.runner import SplitMetrics, TrainConfig
from netite.simgen import SimConfig, simulate


def small_dataset(seed=0):
    return simulate(SimConfig(n=40, k=5, vocab=30, words_per_doc=25, seed=seed))


def test_dataset_roundtrip_bit_exact(tmp_path):
    ds = small_dataset()
    nio.write_dataset(tmp_path / "d", ds, SimConfig(n=40, k=5, vocab=30, words_per_doc=25))
    back = nio.read_dataset(tmp_path / "d")
    assert np.array_equal(back.x, ds.x)
    assert np.array_equal(back.net.edges, ds.net.edges)
    assert np.array_equal(back.t, ds.t)
    for name in ("yf", "ycf", "mu0", "mu1", "prob_t"):
        assert np.array_equal(getattr(back, name), getattr(ds, name)), name


def test_dataset_files_and_formats(tmp_path):
    ds = small_dataset()
    nio.write_dataset(tmp_path / "d", ds)
    edges = (tmp_path / "d" / "edges.tsv").read_text().splitlines()
    assert len(edges) == ds.net.num_edges
    for line in edges:
        i, j = line.split("\t")
        assert int(i) < int(j)
    header = (tmp_path / "d" / "features.mtx").read_text().splitlines()[0]
    n, m, nnz = (int(v) for v in header.split())
    assert (n, m) == ds.x.shape
    assert nnz == int(np.count_nonzero(ds.x))
    nodes_header = (tmp_path / "d" / "nodes.tsv").read_text().splitlines()[0]
    assert nodes_header.split("\t") == nio.NODE_COLUMNS_FULL


def test_observational_only_strips_ground_truth(tmp_path):
    ds = small_dataset()
    nio.write_dataset(tmp_path / "d", ds, observational_only=True)
    nodes_header = (tmp_path / "d" / "nodes.tsv").read_text().splitlines()[0]
    assert nodes_header.split("\t") == ["id", "t", "yf"]
    back = nio.read_dataset(tmp_path / "d")
    assert back.ycf is None and back.mu0 is None and back.prob_t is None
    assert np.array_equal(back.yf, ds.yf)


def test_read_missing_file_raises(tmp_path):
    ds = small_dataset()
    nio.write_dataset(tmp_path / "d", ds)
    (tmp_path / "d" / "meta.json").unlink()
    with pytest.raises(FileNotFoundError):
        nio.read_dataset(tmp_path / "d")


def test_read_bad_header_raises(tmp_path):
    ds = small_dataset()
    nio.write_dataset(tmp_path / "d", ds)
    path = tmp_path / "d" / "nodes.tsv"
    body = path.read_text().splitlines()
    body[0] = "id\ttreated\toutcome"
    path.write_text("\n".join(body) + "\n")
    with pytest.raises(ValueError):
        nio.read_dataset(tmp_path / "d")


def sample_params(seed=0):
    cfg = TrainConfig(gcn_layers=2, out_layers=2, rep_dim=6, hidden_units=4)
    return init_params(cfg, 11, make_rng(seed))


def test_checkpoint_roundtrip_bit_exact(tmp_path):
    p = sample_params()
    path = tmp_path / "model.ckpt"
    nio.save_checkpoint(path, p, seed=42)
    q, seed = nio.load_checkpoint(path)
    assert seed == 42
    assert np.array_equal(q.flatten(), p.flatten())
    assert q.num_features == p.num_features
    assert q.gcn_dims == p.gcn_dims
    assert q.head_dims == p.head_dims


def test_checkpoint_save_is_deterministic(tmp_path):
    p = sample_params()
    nio.save_checkpoint(tmp_path / "a", p, seed=1)
    nio.save_checkpoint(tmp_path / "b", p, seed=1)
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


def test_checkpoint_truncated_raises(tmp_path):
    p = sample_params()
    path = tmp_path / "model.ckpt"
    nio.save_checkpoint(path, p, seed=0)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-10]) + "\n")
    with pytest.raises(nio.CheckpointError):
        nio.load_checkpoint(path)


def test_checkpoint_garbage_value_raises(tmp_path):
    p = sample_params()
    path = tmp_path / "model.ckpt"
    nio.save_checkpoint(path, p, seed=0)
    lines = path.read_text().splitlines()
    lines[10] = "not-a-number"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(nio.CheckpointError):
        nio.load_checkpoint(path)


def test_checkpoint_wrong_format_version_raises(tmp_path):
    p = sample_params()
    path = tmp_path / "model.ckpt"
    nio.save_checkpoint(path, p, seed=0)
    lines = path.read_text().splitlines()
    lines[0] = "format 999"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(nio.CheckpointError):
        nio.load_checkpoint(path)


def test_checkpoint_inconsistent_header_raises(tmp_path):
    p = sample_params()
    path = tmp_path / "model.ckpt"
    nio.save_checkpoint(path, p, seed=0)
    lines = path.read_text().splitlines()
    lines[3] = "gcn_dims 6,6,6"  # extra layer not matched by the value count
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(nio.CheckpointError):
        nio.load_checkpoint(path)


def test_results_rows_format():
    sm = SplitMetrics(pehe_sqrt=1.5, ate_err=0.25, factual_mse=2.0)
    rows = nio.format_results_rows("rep_0", 3, {"train": sm, "valid": sm, "test": sm})
    lines = rows.splitlines()
    assert len(lines) == 3
    assert lines[0].split("\t") == ["rep_0", "3", "train", "1.5", "0.25", "2.0"]
    assert [l.split("\t")[2] for l in lines] == ["train", "valid", "test"]
    assert nio.RESULT_COLUMNS == ["dataset", "rep", "split", "pehe_sqrt", "ate_err", "mse"]
