"""Dataset directory, checkpoint, and results file formats.

Dataset directory layout:
  edges.tsv     one "i<TAB>j" line per undirected edge, 0-indexed, i < j
  features.mtx  coordinate triplets: header "n m nnz", then "i j v" lines
  nodes.tsv     header "id t yf ycf mu0 mu1 prob_t", one row per node;
                in observational-only mode the ground-truth columns
                (ycf, mu0, mu1, prob_t) are omitted
  meta.json     configuration echo plus format version

Checkpoints are decimal text: a fixed header (format version,
architecture dims, seed) followed by the flattened parameter vector, one
shortest-round-trip value per line, in the order documented on
ModelParams. All floats everywhere are written with repr() so a
load(save(x)) round trip is bit exact.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .graph import Network
from .model import ModelParams
from .simgen import NetworkedDataset, SimConfig

FORMAT_VERSION = 1

NODE_COLUMNS_FULL = ["id", "t", "yf", "ycf", "mu0", "mu1", "prob_t"]
NODE_COLUMNS_OBS = ["id", "t", "yf"]


class CheckpointError(ValueError):
    """Corrupt checkpoint or architecture mismatch."""


def _fmt(v: float) -> str:
    return repr(float(v))


def write_dataset(dirpath, ds: NetworkedDataset, cfg: SimConfig | None = None,
                  observational_only: bool = False) -> None:
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)

    with open(dirpath / "edges.tsv", "w") as f:
        for i, j in ds.net.edges:
            f.write(f"{i}\t{j}\n")

    rows, cols = np.nonzero(ds.x)
    with open(dirpath / "features.mtx", "w") as f:
        f.write(f"{ds.x.shape[0]} {ds.x.shape[1]} {rows.size}\n")
        for i, j in zip(rows, cols):
            f.write(f"{i} {j} {_fmt(ds.x[i, j])}\n")

    cols_out = NODE_COLUMNS_OBS if observational_only else NODE_COLUMNS_FULL
    with open(dirpath / "nodes.tsv", "w") as f:
        f.write("\t".join(cols_out) + "\n")
        for i in range(ds.n):
            row = [str(i), str(int(ds.t[i])), _fmt(ds.yf[i])]
            if not observational_only:
                row += [_fmt(ds.ycf[i]), _fmt(ds.mu0[i]), _fmt(ds.mu1[i]), _fmt(ds.prob_t[i])]
            f.write("\t".join(row) + "\n")

    meta = {
        "format_version": FORMAT_VERSION,
        "observational_only": observational_only,
        "config": dataclasses.asdict(cfg) if cfg is not None else None,
    }
    with open(dirpath / "meta.json", "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")


def read_dataset(dirpath) -> NetworkedDataset:
    dirpath = Path(dirpath)
    for name in ("edges.tsv", "features.mtx", "nodes.tsv", "meta.json"):
        if not (dirpath / name).is_file():
            raise FileNotFoundError(f"missing dataset file: {dirpath / name}")

    with open(dirpath / "features.mtx") as f:
        n, m, nnz = (int(v) for v in f.readline().split())
        x = np.zeros((n, m))
        for _ in range(nnz):
            i, j, v = f.readline().split()
            x[int(i), int(j)] = float(v)

    pairs = []
    with open(dirpath / "edges.tsv") as f:
        for line in f:
            if line.strip():
                i, j = line.split()
                pairs.append((int(i), int(j)))
    net = Network.from_pairs(n, pairs)

    with open(dirpath / "nodes.tsv") as f:
        header = f.readline().split()
        full = header == NODE_COLUMNS_FULL
        if not full and header != NODE_COLUMNS_OBS:
            raise ValueError(f"unexpected nodes.tsv header: {header}")
        t = np.zeros(n, dtype=np.int64)
        yf = np.zeros(n)
        ycf = np.zeros(n) if full else None
        mu0 = np.zeros(n) if full else None
        mu1 = np.zeros(n) if full else None
        prob_t = np.zeros(n) if full else None
        for line in f:
            vals = line.split()
            i = int(vals[0])
            t[i] = int(vals[1])
            yf[i] = float(vals[2])
            if full:
                ycf[i], mu0[i], mu1[i], prob_t[i] = (float(v) for v in vals[3:7])
    return NetworkedDataset(x=x, net=net, t=t, yf=yf, ycf=ycf, mu0=mu0, mu1=mu1, prob_t=prob_t)


def save_checkpoint(path, params: ModelParams, seed: int) -> None:
    theta = params.flatten()
    with open(path, "w") as f:
        f.write(f"format {FORMAT_VERSION}\n")
        f.write(f"seed {seed}\n")
        f.write(f"num_features {params.num_features}\n")
        f.write("gcn_dims " + ",".join(str(d) for d in params.gcn_dims) + "\n")
        f.write("head_dims " + ",".join(str(d) for d in params.head_dims) + "\n")
        f.write(f"values {theta.size}\n")
        for v in theta:
            f.write(_fmt(v) + "\n")


def load_checkpoint(path):
    """Returns (params, seed)."""
    try:
        with open(path) as f:
            header = {}
            for _ in range(6):
                key, val = f.readline().split(maxsplit=1)
                header[key] = val.strip()
            if int(header["format"]) != FORMAT_VERSION:
                raise CheckpointError(f"unsupported checkpoint format {header['format']}")
            num_features = int(header["num_features"])
            gcn_dims = [int(d) for d in header["gcn_dims"].split(",")]
            head_dims = [int(d) for d in header["head_dims"].split(",")]
            count = int(header["values"])
            theta = np.array([float(f.readline()) for _ in range(count)])
    except CheckpointError:
        raise
    except (ValueError, KeyError, IndexError) as exc:
        raise CheckpointError(f"corrupt checkpoint {path}: {exc}") from exc
    template = _template_params(num_features, gcn_dims, head_dims)
    if template.flatten().size != theta.size:
        raise CheckpointError("checkpoint value count does not match its architecture header")
    return template.unflatten_from(theta), int(header["seed"])


def _template_params(num_features: int, gcn_dims: list, head_dims: list) -> ModelParams:
    enc_in = [num_features] + gcn_dims[:-1]
    gw = [np.zeros((a, b)) for a, b in zip(enc_in, gcn_dims)]
    gb = [np.zeros(b) for b in gcn_dims]
    head_in = [gcn_dims[-1]] + head_dims[:-1]
    hw = [[np.zeros((a, b)) for a, b in zip(head_in, head_dims)] for _ in (0, 1)]
    hb = [[np.zeros(b) for b in head_dims] for _ in (0, 1)]
    how = [np.zeros(head_dims[-1]) for _ in (0, 1)]
    return ModelParams(gw, gb, hw, hb, how, [0.0, 0.0])


RESULT_COLUMNS = ["dataset", "rep", "split", "pehe_sqrt", "ate_err", "mse"]


def format_results_rows(dataset: str, rep, split_metrics: dict) -> str:
    """Rows of results.tsv for one run (no header)."""
    lines = []
    for split in ("train", "valid", "test"):
        sm = split_metrics[split]
        lines.append("\t".join(
            [dataset, str(rep), split, _fmt(sm.pehe_sqrt), _fmt(sm.ate_err), _fmt(sm.factual_mse)]
        ))
    return "\n".join(lines) + "\n"
