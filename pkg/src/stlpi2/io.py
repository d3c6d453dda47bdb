"""Run artifacts: trajectory tables, history records and run manifests.

Floats are written with ``repr`` so every file round-trips bit-exactly.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .pi2 import IterationRecord
from .ppc import BaseLaw
from .stl import Trajectory, robustness_signal


def write_atomic(path, text: str) -> None:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v: float) -> str:
    return repr(float(v))


def trajectory_table(traj: Trajectory, law: Optional[BaseLaw] = None) -> str:
    """CSV text: ``t, x0.., u0.., rho_i.., gamma_i..``.

    ``rho_i`` is the exact robustness of subtask ``i``'s non-temporal body and
    ``gamma_i`` its funnel lower bound. The last row has no input.
    """
    n = traj.states.shape[1]
    m = 0 if traj.inputs is None else traj.inputs.shape[1]
    subs = () if law is None else law.subtasks
    header = ["t"] + [f"x{i}" for i in range(n)] + [f"u{i}" for i in range(m)]
    header += [f"rho_{i + 1}" for i in range(len(subs))]
    header += [f"gamma_{i + 1}" for i in range(len(subs))]
    times = traj.times
    rho = [robustness_signal(s.psi, traj.states, traj.dt) for s in subs]
    gamma = [s.funnel.gamma(times) for s in subs]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for j, t in enumerate(times):
        row = [_fmt(t)] + [_fmt(v) for v in traj.states[j]]
        if j < traj.steps:
            row += [_fmt(v) for v in traj.inputs[j]]
        else:
            row += [""] * m
        row += [_fmt(r[j]) for r in rho] + [_fmt(g[j]) for g in gamma]
        w.writerow(row)
    return buf.getvalue()


def write_trajectory(path, traj: Trajectory, law: Optional[BaseLaw] = None) -> None:
    write_atomic(path, trajectory_table(traj, law))


def read_trajectory(path) -> Trajectory:
    """Inverse of :func:`write_trajectory` for the state and input columns."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3:
        raise ValueError(f"{path}: need a header and at least two samples")
    header, body = rows[0], rows[1:]
    if not header or header[0] != "t":
        raise ValueError(f"{path}: first column must be 't'")
    xs = [i for i, h in enumerate(header) if h.startswith("x")]
    us = [i for i, h in enumerate(header) if h.startswith("u")]
    if not xs:
        raise ValueError(f"{path}: no state columns")
    t = np.array([float(r[0]) for r in body])
    states = np.array([[float(r[i]) for i in xs] for r in body])
    inputs = np.array([[float(r[i]) for i in us] for r in body[:-1]]).reshape(len(body) - 1, len(us))
    dt = float(t[1] - t[0])
    if not np.allclose(np.diff(t), dt, rtol=1e-9, atol=1e-12):
        raise ValueError(f"{path}: time column is not uniformly spaced")
    return Trajectory(dt=dt, states=states, inputs=inputs, t0=float(t[0]))


def write_history(path, history: Iterable[IterationRecord]) -> None:
    write_atomic(path, "".join(json.dumps(r.as_dict()) + "\n" for r in history))


def read_history(path) -> List[IterationRecord]:
    with open(path) as fh:
        return [IterationRecord(**json.loads(line)) for line in fh if line.strip()]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_manifest(path, config: dict, seed: int, result: dict) -> None:
    """``config`` is the fully resolved scenario dict; ``result`` the final measures."""
    doc = {"config": config, "seed": int(seed), "result": result}
    write_atomic(path, json.dumps(_jsonable(doc), indent=2) + "\n")


def read_manifest(path) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    for key in ("config", "seed", "result"):
        if key not in doc:
            raise ValueError(f"{path}: manifest lacks '{key}'")
    return doc


def write_table(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    write_atomic(path, buf.getvalue())
