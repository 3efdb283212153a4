"""Trajectory CSV format and its reader."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .core import DEFAULT_TOL_BALANCE
from .integrate import BALANCE_FIELDS, Trajectory

__all__ = ["header", "write_csv", "read_csv", "row_violations"]


def header(n: int, m: int) -> list[str]:
    return (["t"] + [f"x{i}" for i in range(n)] + [f"u{j}" for j in range(m)]
            + [f"y{j}" for j in range(m)] + list(BALANCE_FIELDS))


def _fmt(v) -> str:
    v = float(v)
    return "" if math.isnan(v) else format(v, ".17g")


def write_csv(traj: Trajectory, path) -> None:
    n = traj.states.shape[1]
    m = traj.inputs.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header(n, m))
        for k, b in enumerate(traj.balances):
            y = traj.outputs[k] if traj.outputs is not None else [math.nan] * m
            row = [traj.times[k], *traj.states[k], *traj.inputs[k], *y] + [getattr(b, f) for f in BALANCE_FIELDS]
            w.writerow([_fmt(v) for v in row])


def read_csv(path) -> dict[str, np.ndarray]:
    """Read a trajectory CSV into ``{column: array}``; blank cells become NaN."""
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    names = rows[0]
    missing = [c for c in ("t", *BALANCE_FIELDS) if c not in names]
    if missing:
        raise ValueError(f"{path}: missing columns {missing}")
    data = np.full((len(rows) - 1, len(names)), np.nan)
    for i, row in enumerate(rows[1:]):
        if len(row) != len(names):
            raise ValueError(f"{path}: line {i + 2} has {len(row)} fields, expected {len(names)}")
        for j, cell in enumerate(row):
            if cell != "":
                try:
                    data[i, j] = float(cell)
                except ValueError:
                    raise ValueError(f"{path}: line {i + 2}, column {names[j]!r}: not a number: {cell!r}") from None
    return {name: data[:, j] for j, name in enumerate(names)}


def row_violations(cols: dict, tol: float = DEFAULT_TOL_BALANCE) -> list[int]:
    """Row indices whose balance columns break the residual bounds.

    Rows with a blank ``yTu`` (legacy port) are measured against ``dH_dt``.
    """
    yTu = cols["yTu"]
    escale = 1.0 + np.where(np.isnan(yTu), np.abs(cols["dH_dt"]), np.abs(yTu))
    sscale = 1.0 + np.abs(cols["dS_dt"])
    bad = (
        ~(np.abs(cols["energy_residual"]) <= tol * escale)
        | ~(np.abs(cols["entropy_residual"]) <= tol * sscale)
        | ~(cols["sigma_int"] >= 0)
        | ~(cols["sigma_port"] >= 0)
    )
    return [int(i) for i in np.flatnonzero(bad)]
