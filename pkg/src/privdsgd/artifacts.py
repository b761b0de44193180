"""Artifact writers and readers.

Floats are written with 17 significant digits so a CSV round-trips to the
exact same doubles. Every file is written to a temporary name in the target
directory and renamed into place.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TRAJECTORY_COLUMNS = ("k", "mean_gap", "max_node_gap", "consensus_err", "eps_k", "cum_eps", "samples")
LEDGER_COLUMNS = ("k", "delta_k", "sensitivity", "c_k", "epsilon_k", "cum_epsilon")


def fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v) or math.isinf(v):
            return str(v)
        return v
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path, obj) -> Path:
    return atomic_write_text(path, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def write_csv(path, columns, rows) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return atomic_write_text(path, buf.getvalue())


def write_trajectory(path, traj, meta: dict | None = None) -> Path:
    """Write the trajectory CSV plus a ``.meta.json`` sidecar."""
    rows = zip(traj.k, traj.mean_gap, traj.max_node_gap, traj.consensus_err, traj.eps_k, traj.cum_eps, traj.samples)
    out = write_csv(path, TRAJECTORY_COLUMNS, rows)
    sidecar = {"n": traj.n, "gamma_hat": traj.gamma_hat, "final_gap": traj.final_gap}
    sidecar.update(meta or {})
    write_json(sidecar_path(out), sidecar)
    return out


def write_ledger(path, ledger, meta: dict | None = None) -> Path:
    rows = zip(ledger.k, ledger.delta_k, ledger.sensitivity, ledger.c_k, ledger.epsilon_k, ledger.cum_epsilon)
    out = write_csv(path, LEDGER_COLUMNS, rows)
    write_json(sidecar_path(out), meta or {})
    return out


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


@dataclass
class LoadedTrajectory:
    """Trajectory columns read back from CSV (and its sidecar, when present)."""

    path: Path
    k: np.ndarray
    mean_gap: np.ndarray
    max_node_gap: np.ndarray
    consensus_err: np.ndarray
    eps_k: np.ndarray
    cum_eps: np.ndarray
    samples: np.ndarray
    n: int
    gamma_hat: int
    final_gap: float
    meta: dict


def read_trajectory(path) -> LoadedTrajectory:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRAJECTORY_COLUMNS:
            raise ValueError(f"{path}: unexpected trajectory header {header}")
        cols = list(zip(*[[float(v) for v in row] for row in reader]))
    arr = {name: np.asarray(c) for name, c in zip(TRAJECTORY_COLUMNS, cols)}
    meta = {}
    side = sidecar_path(path)
    if side.exists():
        meta = json.loads(side.read_text(encoding="utf-8"))
    samples = arr["samples"].astype(np.int64)
    return LoadedTrajectory(
        path=path,
        k=arr["k"].astype(int),
        mean_gap=arr["mean_gap"],
        max_node_gap=arr["max_node_gap"],
        consensus_err=arr["consensus_err"],
        eps_k=arr["eps_k"],
        cum_eps=arr["cum_eps"],
        samples=samples,
        n=int(meta.get("n", 1)),
        gamma_hat=int(meta.get("gamma_hat", samples[0] // max(int(meta.get("n", 1)), 1))),
        final_gap=float(meta.get("final_gap", arr["mean_gap"][-1])),
        meta=meta,
    )
