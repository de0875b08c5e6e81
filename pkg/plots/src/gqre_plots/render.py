"""Convergence figures from solver trajectory CSVs.

Input is the harness's trajectory schema (one row per recorded iteration,
columns game_id / algorithm / seed / iteration plus the gap metrics). This
module only aggregates and draws: per (game, algorithm, iteration) it takes
the mean of the chosen metric across seeds and a band around it, and writes
one figure per game with one labelled series per algorithm. Nothing
game-theoretic is recomputed here.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

METRICS = ("smoothed_gap", "nash_gap")
BANDS = ("std", "iqr")
FORMATS = ("png", "svg")
REQUIRED_COLUMNS = ("game_id", "algorithm", "seed", "iteration")


@dataclass
class PlotSpec:
    """What to read, which metric to aggregate, and how to draw it.

    csv_paths   one or more trajectory CSVs (concatenated)
    metric      smoothed_gap or nash_gap
    out_dir     figures (and tables) land here
    fmt         png or svg
    band        std: mean +- 1 std across seeds; iqr: 25th..75th percentile
    log_y       log-scale gap axis (gaps decay over orders of magnitude)
    dump_table  also write <game>_<metric>_table.csv with the aggregates
    """

    csv_paths: list
    metric: str = "nash_gap"
    out_dir: Path = Path("out/plots")
    fmt: str = "png"
    band: str = "std"
    log_y: bool = True
    dump_table: bool = False

    def __post_init__(self):
        if isinstance(self.csv_paths, (str, Path)):
            self.csv_paths = [self.csv_paths]
        self.csv_paths = [Path(p) for p in self.csv_paths]
        if not self.csv_paths:
            raise ValueError("need at least one CSV path")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.band not in BANDS:
            raise ValueError(f"band must be one of {BANDS}, got {self.band!r}")
        if self.fmt not in FORMATS:
            raise ValueError(f"fmt must be one of {FORMATS}, got {self.fmt!r}")
        self.out_dir = Path(self.out_dir)


def load_runs(spec: PlotSpec) -> pd.DataFrame:
    """Concatenate the input CSVs, keeping rows where the metric was recorded."""
    frames = []
    for path in spec.csv_paths:
        # the harness writes shortest-round-trip floats; parse them back exactly
        df = pd.read_csv(path, float_precision="round_trip")
        missing = [c for c in (*REQUIRED_COLUMNS, spec.metric) if c not in df.columns]
        if missing:
            raise ValueError(f"{path} is missing columns {missing}")
        frames.append(df)
    data = pd.concat(frames, ignore_index=True)
    data = data.dropna(subset=[spec.metric])
    if data.empty:
        raise ValueError(
            f"no rows with a recorded {spec.metric} in "
            f"{[str(p) for p in spec.csv_paths]}"
        )
    return data


def aggregate_curves(data: pd.DataFrame, metric: str, band: str = "std") -> pd.DataFrame:
    """Mean curve and band edges per (game_id, algorithm, iteration).

    A single-seed group has no spread: its band collapses onto the mean.
    """
    grouped = data.groupby(["game_id", "algorithm", "iteration"])[metric]
    out = grouped.agg(mean="mean", seeds="count")
    if band == "std":
        spread = grouped.std(ddof=1).fillna(0.0)
        out["lo"] = out["mean"] - spread
        out["hi"] = out["mean"] + spread
    else:
        out["lo"] = grouped.quantile(0.25)
        out["hi"] = grouped.quantile(0.75)
    return out.reset_index()


def _write_table(path: Path, rows: pd.DataFrame) -> Path:
    """Dump the aggregates with full round-trip float precision."""
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["game_id", "algorithm", "iteration", "mean", "lo", "hi", "seeds"])
        for rec in rows.itertuples(index=False):
            w.writerow([rec.game_id, rec.algorithm, int(rec.iteration),
                        repr(float(rec.mean)), repr(float(rec.lo)),
                        repr(float(rec.hi)), int(rec.seeds)])
    return path


def render_gap_curves(spec: PlotSpec) -> list[Path]:
    """One figure per game_id, one mean +- band series per algorithm.

    Returns the image paths (tables, when requested, sit next to them).
    Deterministic given the inputs: groups are drawn in sorted order.
    """
    import matplotlib.pyplot as plt  # lazy so callers can pick the backend

    data = load_runs(spec)
    table = aggregate_curves(data, spec.metric, spec.band)
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for game_id, per_game in table.groupby("game_id", sort=True):
        # only the drawn band is floored on a log axis; the table keeps the
        # raw aggregates
        positive = per_game["mean"][per_game["mean"] > 0]
        floor = float(positive.min()) * 0.5 if not positive.empty else None

        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for algorithm, cur in per_game.groupby("algorithm", sort=True):
            cur = cur.sort_values("iteration")
            line, = ax.plot(cur["iteration"], cur["mean"], label=str(algorithm),
                            linewidth=1.4)
            lo = cur["lo"].to_numpy(dtype=float)
            hi = cur["hi"].to_numpy(dtype=float)
            if spec.log_y and floor is not None:
                lo = np.maximum(lo, floor)
            ax.fill_between(cur["iteration"], lo, hi, color=line.get_color(),
                            alpha=0.2, linewidth=0)
        if spec.log_y:
            ax.set_yscale("log")
        ax.set_xlabel("iteration")
        ax.set_ylabel(spec.metric.replace("_", " "))
        ax.set_title(str(game_id))
        ax.legend()
        fig.tight_layout()
        path = spec.out_dir / f"{game_id}_{spec.metric}.{spec.fmt}"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
        if spec.dump_table:
            _write_table(spec.out_dir / f"{game_id}_{spec.metric}_table.csv",
                         per_game)
    return written
