"""File formats: datasets, truth files, models, embeddings, manifests.

All writers are byte-deterministic: JSON is emitted with sorted keys, floats
serialize via repr (shortest round-trip form), and no output embeds
timestamps or filesystem ordering. Rankings serialize as comma-separated
0-based indices ("2,0,1"); dataset CSVs are long format
(task_id, lf_id, label-column) with a parallel truth file.
"""

import csv
import hashlib
import io as _io
import json
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidArgumentError
from .label_model import (
    FINITE_METRIC,
    RANKING,
    REAL_VECTOR,
    LabelingMatrix,
    LabelModel,
)
from .metric_spaces import FiniteMetricSpace
from .permutations import perm_from_str, perm_to_str

__all__ = [
    "canonical_json",
    "config_hash",
    "write_manifest",
    "write_csv",
    "write_dataset",
    "read_dataset",
    "write_truth",
    "read_truth",
    "write_model",
    "read_model",
    "model_to_dict",
    "model_from_dict",
    "write_pseudolabels",
    "read_edge_list",
    "write_edge_list",
    "write_distance_matrix",
    "read_distance_matrix",
    "write_embedding",
]


def _fmt(x):
    if isinstance(x, (np.floating, float)):
        return repr(float(x))
    return str(int(x))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return None if np.isnan(f) else f
    return obj


def canonical_json(obj):
    """Deterministic JSON text: sorted keys, no whitespace surprises, NaN -> null."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def config_hash(obj):
    """sha256 of the canonical JSON form, for regeneration manifests."""
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def write_manifest(path, config, seed=None, extra=None):
    payload = {"config_hash": config_hash(config), "seed": seed, "version": __version__}
    payload.update(extra or {})
    Path(path).write_text(canonical_json(payload))


def write_csv(path, header, rows):
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    Path(path).write_text(buf.getvalue())


def write_dataset(path, data):
    """Long-format dataset CSV: one row per (task, labeler)."""
    if data.space_kind == RANKING:
        rows = [
            (i, a, perm_to_str(data.labels[i, a]))
            for i in range(data.n_tasks)
            for a in range(data.n_lfs)
        ]
        write_csv(path, ["task_id", "lf_id", "perm"], rows)
    elif data.space_kind == REAL_VECTOR:
        if data.dim != 1:
            raise InvalidArgumentError("only scalar real labels serialize to CSV")
        rows = [
            (i, a, _fmt(data.labels[i, a, 0]))
            for i in range(data.n_tasks)
            for a in range(data.n_lfs)
        ]
        write_csv(path, ["task_id", "lf_id", "value"], rows)
    else:
        rows = [
            (i, a, int(data.labels[i, a]))
            for i in range(data.n_tasks)
            for a in range(data.n_lfs)
        ]
        write_csv(path, ["task_id", "lf_id", "node"], rows)


def read_dataset(path, space=None):
    """Read a dataset CSV back into a LabelingMatrix.

    The label column name declares the space kind (perm, value, node);
    node datasets need the ``space`` argument.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    if header[:2] != ["task_id", "lf_id"] or len(header) != 3 or not rows:
        raise InvalidArgumentError(f"{path}: expected header task_id,lf_id,<label> and data rows")
    kind_col = header[2]
    cells = {}
    for task, lf, raw in rows:
        cells[(int(task), int(lf))] = raw
    n = max(t for t, _ in cells) + 1
    m = max(a for _, a in cells) + 1
    if len(cells) != n * m:
        raise InvalidArgumentError(f"{path}: missing (task, labeler) rows")
    if kind_col == "perm":
        first = perm_from_str(cells[(0, 0)])
        labels = np.empty((n, m, first.size), dtype=np.int64)
        for (t, a), raw in cells.items():
            labels[t, a] = perm_from_str(raw)
        return LabelingMatrix(RANKING, labels)
    if kind_col == "value":
        labels = np.empty((n, m))
        for (t, a), raw in cells.items():
            labels[t, a] = float(raw)
        return LabelingMatrix(REAL_VECTOR, labels)
    if kind_col == "node":
        if space is None:
            raise InvalidArgumentError(f"{path}: node dataset needs a distance matrix (space)")
        labels = np.empty((n, m), dtype=np.int64)
        for (t, a), raw in cells.items():
            labels[t, a] = int(raw)
        return LabelingMatrix(FINITE_METRIC, labels, space=space)
    raise InvalidArgumentError(f"{path}: unknown label column {kind_col!r}")


def write_truth(path, truth, space_kind):
    if space_kind == RANKING:
        rows = [(i, perm_to_str(t)) for i, t in enumerate(truth)]
        write_csv(path, ["task_id", "perm"], rows)
    elif space_kind == REAL_VECTOR:
        rows = [(i, _fmt(v)) for i, v in enumerate(truth)]
        write_csv(path, ["task_id", "value"], rows)
    else:
        rows = [(i, int(v)) for i, v in enumerate(truth)]
        write_csv(path, ["task_id", "node"], rows)


def read_truth(path):
    """Read a truth CSV; returns (space_kind, array)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = sorted(list(reader), key=lambda r: int(r[0]))
    if len(header) != 2 or header[0] != "task_id" or not rows:
        raise InvalidArgumentError(f"{path}: expected header task_id,<label> and data rows")
    col = header[1]
    if col == "perm":
        return RANKING, np.array([perm_from_str(r[1]) for r in rows])
    if col == "value":
        return REAL_VECTOR, np.array([float(r[1]) for r in rows])
    if col == "node":
        return FINITE_METRIC, np.array([int(r[1]) for r in rows], dtype=np.int64)
    raise InvalidArgumentError(f"{path}: unknown label column {col!r}")


def model_to_dict(model):
    return {
        "space_kind": model.space_kind,
        "path": model.path,
        "dims": model.dims,
        "thetas": model.thetas,
        "expected_distances": model.expected_distances,
        "accuracies": model.accuracies,
        "pairwise_moments": model.pairwise_moments,
        "theta_matrix": model.theta_matrix,
        "embedding": model.embedding,
        "version": model.version,
    }


def model_from_dict(payload):
    def arr(key, none_ok=False):
        val = payload.get(key)
        if val is None:
            if none_ok:
                return None
            raise InvalidArgumentError(f"model document missing field {key!r}")
        out = np.asarray(val, dtype=np.float64)
        return np.where(np.isnan(out), np.nan, out)

    for key in ("space_kind", "path", "dims", "thetas", "expected_distances", "version"):
        if key not in payload:
            raise InvalidArgumentError(f"model document missing field {key!r}")
    acc = payload.get("accuracies")
    acc = np.array([np.nan if v is None else float(v) for v in acc]) if acc is not None else None
    return LabelModel(
        space_kind=payload["space_kind"],
        path=payload["path"],
        dims=payload["dims"],
        thetas=arr("thetas"),
        expected_distances=arr("expected_distances"),
        accuracies=acc,
        pairwise_moments=arr("pairwise_moments"),
        embedding=payload.get("embedding", {}),
        version=payload["version"],
        theta_matrix=arr("theta_matrix", none_ok=True),
        estimates=None,
    )


def write_model(path, model, extra_manifest=None):
    payload = model_to_dict(model)
    payload["manifest"] = {
        "config_hash": config_hash(payload),
        "version": __version__,
        **(extra_manifest or {}),
    }
    Path(path).write_text(canonical_json(payload))


def read_model(path):
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"{path}: malformed JSON ({exc})") from exc
    return model_from_dict(payload)


def write_pseudolabels(path, labels, space_kind):
    if space_kind == RANKING:
        rows = [(i, perm_to_str(z)) for i, z in enumerate(labels)]
        write_csv(path, ["task_id", "label"], rows)
    elif space_kind == REAL_VECTOR:
        write_csv(path, ["task_id", "label"], [(i, _fmt(v)) for i, v in enumerate(labels)])
    else:
        write_csv(path, ["task_id", "label"], [(i, int(v)) for i, v in enumerate(labels)])


def write_edge_list(path, edges):
    Path(path).write_text("".join(f"{int(u)} {int(v)}\n" for u, v in edges))


def read_edge_list(path):
    edges = []
    for ln, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidArgumentError(f"{path}:{ln}: expected 'u v', got {line!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return edges


def write_distance_matrix(path, space):
    rows = [[_fmt(v) for v in row] for row in space.dist]
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    Path(path).write_text(buf.getvalue())


def read_distance_matrix(path):
    with open(path, newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    return FiniteMetricSpace(np.array(rows))


def write_embedding(prefix, report):
    """Coordinates CSV plus a JSON descriptor (dim, epsilon, scale, exponent)."""
    prefix = Path(prefix)
    rows = [[_fmt(v) for v in row] for row in report.coords]
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    prefix.with_suffix(".coords.csv").write_text(buf.getvalue())
    descriptor = {
        "dim": report.target_dim,
        "epsilon": report.epsilon,
        "scale": report.scale,
        "exponent": report.exponent,
    }
    prefix.with_suffix(".json").write_text(canonical_json(descriptor))
    return prefix.with_suffix(".coords.csv"), prefix.with_suffix(".json")
