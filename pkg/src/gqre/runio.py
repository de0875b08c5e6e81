"""Trajectory CSV and manifest serialization.

One CSV row per recorded iteration, fixed column order; floats are written
with repr (shortest round-trip) and unevaluated metrics stay empty. Re-runs
with identical inputs produce byte-identical files except for the wall_ms
column, which the manifest flags as nondeterministic.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

from .games import Game, game_to_dict
from .solver import Trajectory

SCHEMA_VERSION = 1
COLUMNS = ("run_id", "algorithm", "game_id", "seed", "iteration", "gamma",
           "epsilon", "M", "smoothed_gap", "nash_gap", "wall_ms")
NONDETERMINISTIC_COLUMNS = ("wall_ms",)


def run_id(game_id: str, algorithm: str, seed) -> str:
    return f"{game_id}__{algorithm}__seed{seed}"


def _fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    return repr(x)


def trajectory_rows(traj: Trajectory):
    rid = run_id(traj.game_id, traj.algorithm, traj.seed)
    for idx, t in enumerate(traj.iterations):
        M = traj.M[idx]
        yield {
            "run_id": rid,
            "algorithm": traj.algorithm,
            "game_id": traj.game_id,
            "seed": "" if traj.seed is None else str(traj.seed),
            "iteration": str(int(t)),
            "gamma": _fmt(traj.gamma[idx]),
            "epsilon": _fmt(traj.epsilon[idx]),
            "M": "" if math.isnan(M) else str(int(M)),
            "smoothed_gap": _fmt(traj.smoothed_gap[idx]),
            "nash_gap": _fmt(traj.nash_gap[idx]),
            "wall_ms": _fmt(traj.wall_ms[idx]),
        }


def write_trajectories(path, trajectories) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=COLUMNS)
        w.writeheader()
        for traj in trajectories:
            for row in trajectory_rows(traj):
                w.writerow(row)
    return path


def read_trajectories(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def game_content_hash(game: Game) -> str:
    blob = json.dumps(game_to_dict(game), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def write_manifest(path, *, config: dict, games: dict, runs: list[dict],
                   extra: dict | None = None) -> Path:
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "columns": list(COLUMNS),
        "nondeterministic_columns": list(NONDETERMINISTIC_COLUMNS),
        "config": config,
        "games": games,
        "runs": runs,
    }
    if extra:
        manifest.update(extra)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return path
