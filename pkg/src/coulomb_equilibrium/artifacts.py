"""Plain-text artifact files.

Every file starts with a ``# format: <kind> <version>`` line and loaders
reject anything else. Floats are written with 17 significant digits, which
round-trips IEEE doubles exactly. Writes go to a temporary file in the target
directory and are then renamed into place.
"""
from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .equilibrium import EquilibriumModel
from .errors import FormatError
from .summaries import ClassSummary
from .transform import TransformModel

FORMAT_VERSION = 1

SUMMARIES_FILE = "summaries.txt"
EQUILIBRIUM_FILE = "equilibrium.txt"
PROJECTED_FILE = "projected_train.csv"
CHECKPOINT_FILE = "checkpoint.txt"
LOSS_FILE = "loss_history.txt"
BOUNDS_FILE = "input_bounds.txt"
MANIFEST_FILE = "manifest.txt"


def fmt(value) -> str:
    return f"{float(value):.17g}"


def fmt_row(values) -> str:
    return " ".join(fmt(v) for v in np.ravel(values))


def header(kind: str) -> str:
    return f"# format: {kind} {FORMAT_VERSION}\n"


def atomic_write(path, text: str):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_lines(path, kind: str) -> list:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"missing artifact: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    expected = header(kind).rstrip("\n")
    if not lines or lines[0] != expected:
        found = lines[0] if lines else "<empty file>"
        raise FormatError(f"{path}: expected version line {expected!r}, found {found!r}")
    return lines[1:]


def _floats(line: str) -> np.ndarray:
    return np.array([float(tok) for tok in line.split()], dtype=np.float64)


def _keyed(lines, keys) -> dict:
    out = {}
    for line in lines:
        key, _, value = line.partition(" ")
        if key in keys:
            out[key] = value.strip()
    missing = [k for k in keys if k not in out]
    if missing:
        raise FormatError(f"missing header fields: {missing}")
    return out


# ---------------------------------------------------------------------------
# summaries


def dump_summaries(summaries) -> str:
    d = summaries[0].position.shape[0] if summaries else 0
    text = header("summaries")
    text += f"n_classes {len(summaries)}\ndim {d}\n"
    text += "counts " + " ".join(str(s.count) for s in summaries) + "\n"
    text += "# class_id charge position[dim] spread[dim]\n"
    for s in summaries:
        text += f"{s.class_id} {fmt(s.charge)} {fmt_row(s.position)} {fmt_row(s.spread)}\n"
    return text


def load_summaries(path) -> list:
    lines = _read_lines(path, "summaries")
    meta = _keyed(lines[:3], ["n_classes", "dim", "counts"])
    n, d = int(meta["n_classes"]), int(meta["dim"])
    counts = [int(c) for c in meta["counts"].split()]
    rows = [ln for ln in lines[3:] if ln and not ln.startswith("#")]
    if len(rows) != n or len(counts) != n:
        raise FormatError(f"{path}: expected {n} class rows")
    out = []
    for row, count in zip(rows, counts):
        values = row.split()
        if len(values) != 2 + 2 * d:
            raise FormatError(f"{path}: class row has {len(values)} fields, expected {2 + 2 * d}")
        nums = np.array([float(v) for v in values[1:]])
        out.append(ClassSummary(int(values[0]), float(nums[0]), nums[1:1 + d], nums[1 + d:], count))
    return out


# ---------------------------------------------------------------------------
# equilibrium model


def dump_equilibrium(model: EquilibriumModel) -> str:
    text = header("equilibrium")
    text += f"n_classes {model.n_classes}\ndim {model.dim}\nk {fmt(model.k)}\n"
    text += f"tolerance {fmt(model.tolerance)}\nconverged {str(model.converged).lower()}\n"
    text += f"final_total_force {fmt(model.final_total_force)}\n"
    text += f"iterations {model.iterations_used}\n"
    text += f"history {fmt_row(model.history)}\n"
    text += "# positions\n"
    text += "".join(fmt_row(row) + "\n" for row in model.equilibrium_positions)
    text += "# deltas\n"
    text += "".join(fmt_row(row) + "\n" for row in model.deltas)
    return text


def load_equilibrium(path, summaries) -> EquilibriumModel:
    lines = _read_lines(path, "equilibrium")
    keys = ["n_classes", "dim", "k", "tolerance", "converged", "final_total_force",
            "iterations", "history"]
    meta = _keyed(lines[:len(keys)], keys)
    n, d = int(meta["n_classes"]), int(meta["dim"])
    body = [ln for ln in lines[len(keys):] if ln and not ln.startswith("#")]
    if len(body) != 2 * n:
        raise FormatError(f"{path}: expected {2 * n} matrix rows, found {len(body)}")
    positions = np.vstack([_floats(ln) for ln in body[:n]]).reshape(n, d)
    deltas = np.vstack([_floats(ln) for ln in body[n:]]).reshape(n, d)
    if len(summaries) != n:
        raise FormatError(f"{path}: {n} classes but {len(summaries)} summaries")
    return EquilibriumModel(
        equilibrium_positions=positions,
        deltas=deltas,
        summaries=list(summaries),
        k=float(meta["k"]),
        final_total_force=float(meta["final_total_force"]),
        iterations_used=int(meta["iterations"]),
        converged=meta["converged"] == "true",
        tolerance=float(meta["tolerance"]),
        history=_floats(meta["history"]),
    )


# ---------------------------------------------------------------------------
# transform checkpoint


def dump_checkpoint(model: TransformModel) -> str:
    text = header("checkpoint")
    text += "layer_sizes " + " ".join(str(s) for s in model.layer_sizes) + "\n"
    text += "activation relu/identity\n"
    text += f"seed {model.seed}\nepochs_completed {model.epochs_completed}\n"
    for layer, (W, b) in enumerate(zip(model.weights, model.biases)):
        text += f"# layer {layer} weights {W.shape[0]}x{W.shape[1]}\n"
        text += "".join(fmt_row(row) + "\n" for row in W)
        text += f"# layer {layer} bias\n{fmt_row(b)}\n"
    text += "# loss\n"
    text += "".join(f"loss {epoch} {fmt(v)}\n" for epoch, v in enumerate(model.loss_history))
    return text


def load_checkpoint(path) -> TransformModel:
    lines = _read_lines(path, "checkpoint")
    meta = _keyed(lines[:4], ["layer_sizes", "activation", "seed", "epochs_completed"])
    if meta["activation"] != "relu/identity":
        raise FormatError(f"{path}: unsupported activation {meta['activation']!r}")
    sizes = [int(s) for s in meta["layer_sizes"].split()]
    data = [ln for ln in lines[4:] if ln and not ln.startswith("#") and not ln.startswith("loss ")]
    weights, biases, cursor = [], [], 0
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        block = data[cursor:cursor + fan_in]
        if len(block) != fan_in:
            raise FormatError(f"{path}: truncated weight block")
        weights.append(np.vstack([_floats(ln) for ln in block]).reshape(fan_in, fan_out))
        biases.append(_floats(data[cursor + fan_in]).reshape(fan_out))
        cursor += fan_in + 1
    losses = [float(ln.split()[2]) for ln in lines if ln.startswith("loss ")]
    return TransformModel(
        tuple(sizes), tuple(weights), tuple(biases), seed=int(meta["seed"]),
        epochs_completed=int(meta["epochs_completed"]), loss_history=tuple(losses),
    )


def dump_loss_history(model: TransformModel) -> str:
    return header("loss-history") + "".join(
        f"{epoch} {fmt(v)}\n" for epoch, v in enumerate(model.loss_history)
    )


def load_loss_history(path) -> np.ndarray:
    lines = _read_lines(path, "loss-history")
    return np.array([float(ln.split()[1]) for ln in lines if ln.strip()])


# ---------------------------------------------------------------------------
# embeddings and bounds


def dump_embeddings(labels, points, kind: str = "embeddings") -> str:
    points = np.atleast_2d(points)
    d = points.shape[1]
    text = header(kind)
    text += ",".join(["label"] + [f"e_{j + 1}" for j in range(d)]) + "\n"
    for label, row in zip(labels, points):
        text += ",".join([str(int(label))] + [fmt(v) for v in row]) + "\n"
    return text


def load_embeddings(path, kind: str = "embeddings") -> tuple:
    lines = _read_lines(path, kind)
    rows = [ln.split(",") for ln in lines[1:] if ln]
    labels = np.array([int(r[0]) for r in rows], dtype=np.int64)
    points = np.array([[float(v) for v in r[1:]] for r in rows], dtype=np.float64)
    return labels, points


def dump_bounds(lo, hi) -> str:
    return header("input-bounds") + f"min {fmt_row(lo)}\nmax {fmt_row(hi)}\n"


def load_bounds(path) -> tuple:
    meta = _keyed(_read_lines(path, "input-bounds"), ["min", "max"])
    return _floats(meta["min"]), _floats(meta["max"])


def dump_manifest(entries: dict) -> str:
    return header("manifest") + "".join(f"{k} = {v}\n" for k, v in entries.items())


def load_manifest(path) -> dict:
    out = {}
    for line in _read_lines(path, "manifest"):
        if "=" in line:
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out
