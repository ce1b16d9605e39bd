"""Run reports and delimited artifacts written by the CLI.

Every command writes a JSON RunReport carrying the command name, the
scenario content digest, the seed, and its numeric results, so a run
can be reproduced from the report alone.  Trajectories and sweep
tables go to CSV next to the report.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats."""
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)  # JSON has no NaN/Infinity; keep them readable
    return obj


@dataclass
class RunReport:
    command: str
    tool_version: str
    scenario_name: str
    input_digest: str
    seed: int | None = None
    parameters: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    artifacts: list[str] = field(default_factory=list)
    wall_time_s: float = 0.0

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "tool_version": self.tool_version,
            "scenario_name": self.scenario_name,
            "input_digest": self.input_digest,
            "seed": self.seed,
            "parameters": jsonable(self.parameters),
            "results": jsonable(self.results),
            "artifacts": list(self.artifacts),
            "wall_time_s": self.wall_time_s,
        }

    def write(self, out_dir, filename: str = "report.json") -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / filename
        path.write_text(
            json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
        return path


class Stopwatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        return False


def write_trajectory_csv(path, iters, powers, residuals) -> Path:
    """Columns: iter, p_1..p_n, residual."""
    path = Path(path)
    powers = np.asarray(powers, dtype=float)
    n = powers.shape[1]
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter"] + [f"p_{i + 1}" for i in range(n)] + ["residual"])
        for it, row, res in zip(iters, powers, residuals):
            writer.writerow([int(it)] + [repr(float(v)) for v in row] + [repr(float(res))])
    return path


def write_table_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([
                repr(float(v)) if isinstance(v, (float, np.floating)) else v
                for v in row
            ])
    return path


def write_power_matrix_csv(path, P) -> Path:
    """Links as rows, carriers as columns."""
    P = np.asarray(P, dtype=float)
    header = ["link"] + [f"carrier_{f + 1}" for f in range(P.shape[1])]
    rows = [[i + 1] + [float(v) for v in P[i]] for i in range(P.shape[0])]
    return write_table_csv(path, header, rows)
