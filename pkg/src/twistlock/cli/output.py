"""Result persistence: results.json, grid.csv and per-experiment side files.

Everything written here is a pure function of the result record, so equal
records give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os

import numpy as np

from ..oracle import write_verification_csv
from . import plots

__all__ = ["GRID_SCHEMA", "to_jsonable", "grid_csv", "write_outputs"]

GRID_SCHEMA = "twistlock-grid/1"


def to_jsonable(value):
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [to_jsonable(v) for v in items]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    return value


def _cell_text(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _table(rows, header: str, columns=None) -> str:
    if columns is None:
        columns = []
        for row in rows:
            for key in row:
                if key not in columns and not isinstance(row[key], (list, dict)):
                    columns.append(key)
    buf = io.StringIO()
    buf.write(f"# {header}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell_text(row.get(c)) for c in columns])
    return buf.getvalue()


def grid_csv(result: dict) -> str:
    """One row per sweep cell, sorted by cell index, analytic and numeric columns side by side."""
    return _table(result["cells"], f"{GRID_SCHEMA} experiment={result['config']['experiment']}")


def _write(path, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def write_outputs(result: dict, out_dir) -> list[str]:
    """Write every artifact of ``result`` into ``out_dir``; returns the file names."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    record = {k: v for k, v in result.items() if k != "extra"}
    _write(os.path.join(out_dir, "results.json"), json.dumps(to_jsonable(record), indent=1, sort_keys=True) + "\n")
    written.append("results.json")
    _write(os.path.join(out_dir, "grid.csv"), grid_csv(result))
    written.append("grid.csv")

    exp = result["config"]["experiment"]
    extra = result.get("extra", {})
    for q, traj in sorted(extra.get("trajectories", {}).items()):
        name = f"trajectory_q{q}.csv"
        traj.to_csv(os.path.join(out_dir, name))
        written.append(name)
    if exp == "delay_waves" and extra.get("trials"):
        _write(os.path.join(out_dir, "trials.csv"), _table(extra["trials"], "twistlock-trials/1"))
        written.append("trials.csv")
    if exp == "critical_k":
        _write(os.path.join(out_dir, "staircase.csv"),
               _table(result["analytic"]["staircase"], "twistlock-staircase/1", ["n", "critical_k"]))
        written.append("staircase.csv")
    if exp == "verify_oracle":
        growth = [r for r in result["cells"] if r["check"] == "growth"]
        rows = [dict(q=r["q"], m=r["m"], analytic=r["analytic"],
                     oracle=float("nan") if r.get("oracle") is None else r["oracle"],
                     abs_err=r.get("abs_err", float("nan")), rel_err=r.get("rel_err", float("nan")),
                     verdict=r["verdict"]) for r in growth]
        write_verification_csv(rows, os.path.join(out_dir, "verification.csv"))
        written.append("verification.csv")
    written += plots.emit_plots(result, out_dir)
    return written
