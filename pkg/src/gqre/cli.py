"""Command-line harness: gen | solve | verify | respond | bench.

Outputs land under --out-dir, which defaults to $GQRE_OUT_DIR or ./out.
Config files are YAML (JSON is valid YAML); command-line flags override
config values. All commands are deterministic given their inputs except for
the wall_ms column of trajectory CSVs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from . import baselines, metrics, runio
from .games import (Game, StrategyProfile, gen_matching_pennies, gen_rank_k,
                    gen_strongly_monotone, load_game, save_game)
from .regularizers import Regularizer, quantal_response, regularizer_list
from .solver import ALGORITHMS, RecordOptions, Schedule, run_smoothed_fw

RUNNERS = {
    "smoothed_fw": run_smoothed_fw,
    "hard_fw": baselines.run_hard_fw,
    "extragradient": baselines.run_extragradient,
    "ogd": baselines.run_ogd,
    "adaptive_pgd": baselines.run_adaptive_pgd,
}

# Long-horizon benchmark protocol: simulated play with a fixed batch size,
# diminishing gamma_t / epsilon_t, entropy penalties at rationality 1.
DEFAULT_BENCH = {
    "name": "default",
    "T": 1000,
    "gradient_mode": "oracle",
    "schedule": {"mode": "theorem", "eta": 1.0, "M": 100},
    "regularizers": {"kind": "entropy", "lambda": 1.0},
    "seeds": {"base": 1000, "count": 20},
    "metrics": {"nash_gap": True, "smoothed_gap": True},
    "algorithms": list(ALGORITHMS),
    "games": [
        {"family": "matching_pennies"},
        {"family": "monotone", "n": 10, "mu": 1.0, "skew": 0.3, "seed": 101},
        {"family": "monotone", "n": 20, "mu": 1.0, "skew": 0.3, "seed": 102},
        {"family": "monotone", "n": 100, "mu": 1.0, "skew": 0.3, "seed": 103},
        {"family": "monotone", "n": 200, "mu": 1.0, "skew": 0.3, "seed": 104},
        {"family": "rank_k", "m": 5, "k": 1, "seed": 201},
        {"family": "rank_k", "m": 5, "k": 2, "seed": 202},
        {"family": "rank_k", "m": 5, "k": 3, "seed": 203},
        {"family": "rank_k", "m": 5, "k": 4, "seed": 204},
    ],
}


def default_out_dir() -> Path:
    return Path(os.environ.get("GQRE_OUT_DIR", "out"))


def build_game(spec: dict) -> Game:
    spec = dict(spec)
    family = spec.pop("family", None)
    if "path" in spec:
        return load_game(spec["path"])
    if family == "matching_pennies":
        return gen_matching_pennies()
    if family == "monotone":
        return gen_strongly_monotone(spec["n"], spec.get("mu", 1.0),
                                     spec.get("skew", 0.3), spec.get("seed"))
    if family == "rank_k":
        return gen_rank_k(spec["m"], spec["k"], spec.get("seed"))
    raise ValueError(
        f"game spec needs 'path' or family in matching_pennies/monotone/rank_k, got {family!r}"
    )


def _load_yaml(path) -> dict:
    data = yaml.safe_load(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValueError(f"config {path} must be a mapping at top level")
    return data


def _schedule_from(cfg: dict) -> Schedule:
    return Schedule(mode=cfg.get("mode", "theorem"), eta=cfg.get("eta", 1.0),
                    gamma=cfg.get("gamma"), epsilon=cfg.get("epsilon"),
                    M=cfg.get("M"))


def _record_from(cfg: dict, T: int) -> RecordOptions:
    # default cadence: every iteration up to T=2000, every 10th beyond
    # (gap evaluation costs a full exact gradient per player)
    every = cfg.get("every")
    if every is None:
        every = 1 if T <= 2000 else 10
    return RecordOptions(smoothed_gap=cfg.get("smoothed_gap", True),
                         nash_gap=cfg.get("nash_gap", False),
                         every=int(every),
                         keep_profiles=False)


def _parse_regs(args, num_players: int):
    if getattr(args, "regs", None):
        raw = args.regs
        if raw.startswith("@"):
            spec = _load_yaml(raw[1:])
        else:
            spec = yaml.safe_load(raw)
        return regularizer_list(spec, num_players)
    spec = {"kind": args.kind, "lambda": args.lam}
    if getattr(args, "alpha", None) is not None:
        spec["alpha"] = args.alpha
    return regularizer_list(spec, num_players)


def _check_algorithm(name: str) -> str:
    if name not in RUNNERS:
        raise ValueError(
            f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}"
        )
    return name


def cmd_gen(args) -> int:
    spec = {"family": args.family}
    for key in ("n", "m", "k", "mu", "skew", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            spec[key] = val
    game = build_game(spec)
    out = Path(args.out) if args.out else default_out_dir() / f"{game.game_id}.json"
    save_game(game, out)
    print(out)
    return 0


def cmd_respond(args) -> int:
    u = np.array([float(x) for x in args.u.split(",")])
    spec = {"kind": args.kind, "lambda": args.lam}
    if args.alpha is not None:
        spec["alpha"] = args.alpha
    if args.reference:
        spec["reference"] = [float(x) for x in args.reference.split(",")]
    if args.support_points:
        spec["support_points"] = [float(x) for x in args.support_points.split(",")]
    reg = Regularizer.from_dict(spec)
    p = quantal_response(reg, u)
    print(json.dumps({"p": p.tolist()}))
    return 0


def cmd_verify(args) -> int:
    game = load_game(args.game)
    prof_data = json.loads(Path(args.profile).read_text())
    if "dists" not in prof_data:
        raise ValueError("profile file is missing required field 'dists'")
    profile = StrategyProfile([np.asarray(d, float) for d in prof_data["dists"]],
                              floor=prof_data.get("floor", 0.0))
    regs = _parse_regs(args, game.num_players)
    report = metrics.equilibrium_report(game, regs, profile, eta=args.eta, tol=args.tol)
    out = {
        "is_gqre": report.is_gqre,
        "epsilon": report.epsilon,
        "eta": args.eta,
        "tol": args.tol,
        "per_player": [
            {"V_i": report.V_i[i] if report.V_i else None,
             "epsilon_i": report.epsilon_i[i],
             "max_pure_slack": report.slack_i[i] if report.slack_i else None}
            for i in range(game.num_players)
        ],
    }
    text = json.dumps(out, indent=2)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    print(text)
    return 0


def _solve_config(args) -> dict:
    cfg = _load_yaml(args.config) if args.config else {}
    if args.game:
        cfg["game"] = {"path": args.game}
    if args.family:
        game_spec = {"family": args.family}
        for key in ("n", "m", "k", "mu", "skew"):
            val = getattr(args, key, None)
            if val is not None:
                game_spec[key] = val
        if args.game_seed is not None:
            game_spec["seed"] = args.game_seed
        cfg["game"] = game_spec
    if args.algorithm:
        cfg["algorithm"] = args.algorithm
    if args.T:
        cfg["T"] = args.T
    if args.gradient_mode:
        cfg["gradient_mode"] = args.gradient_mode
    sched = cfg.setdefault("schedule", {})
    for key, val in (("mode", args.schedule), ("eta", args.eta), ("gamma", args.gamma),
                     ("epsilon", args.epsilon), ("M", args.M)):
        if val is not None:
            sched[key] = val
    if args.kind or "regularizers" not in cfg:
        cfg["regularizers"] = {"kind": args.kind or "entropy", "lambda": args.lam}
        if args.alpha is not None:
            cfg["regularizers"]["alpha"] = args.alpha
    met = cfg.setdefault("metrics", {})
    if args.every is not None:
        met["every"] = args.every
    if args.nash_gap:
        met["nash_gap"] = True
    seeds = cfg.setdefault("seeds", {})
    if args.seed is not None:
        seeds["base"], seeds["count"] = args.seed, 1
    if args.seeds is not None:
        seeds["count"] = args.seeds
    if args.seed_base is not None:
        seeds["base"] = args.seed_base
    seeds.setdefault("base", 0)
    seeds.setdefault("count", 1)
    return cfg


def cmd_solve(args) -> int:
    cfg = _solve_config(args)
    if "game" not in cfg:
        raise ValueError("solve needs a game: --game FILE or --family ... (or config key 'game')")
    game = build_game(cfg["game"])
    algorithm = _check_algorithm(cfg.get("algorithm", "smoothed_fw"))
    schedule = _schedule_from(cfg.get("schedule", {}))
    T = int(cfg.get("T", 1000))
    record = _record_from(cfg.get("metrics", {}), T)
    regs = regularizer_list(cfg.get("regularizers", {"kind": "entropy", "lambda": 1.0}),
                            game.num_players)
    mode = cfg.get("gradient_mode", "exact")
    base, count = int(cfg["seeds"]["base"]), int(cfg["seeds"]["count"])

    out_dir = Path(args.out_dir) if args.out_dir else default_out_dir() / "solve"
    trajectories = []
    for j in range(count):
        seed = base + j
        rng = np.random.default_rng([seed, 0, 0])
        trajectories.append(RUNNERS[algorithm](game, regs, schedule, T,
                                               gradient_mode=mode, seed=seed,
                                               rng=rng, record=record))
    csv_path = runio.write_trajectories(out_dir / "trajectories.csv", trajectories)
    runio.write_manifest(
        out_dir / "manifest.json",
        config=cfg,
        games={game.game_id: {"sha256": runio.game_content_hash(game),
                              "metadata_keys": sorted(game.metadata)}},
        runs=[{"run_id": runio.run_id(game.game_id, algorithm, base + j),
               "game_id": game.game_id, "algorithm": algorithm,
               "seed": base + j, "rng_key": [base + j, 0, 0]} for j in range(count)],
    )
    print(csv_path)
    return 0


_WORKER_STATE: dict = {}


def _bench_init(games, regs_by_game, schedule, T, mode, record):
    _WORKER_STATE.update(games=games, regs=regs_by_game, schedule=schedule,
                         T=T, mode=mode, record=record)


def _bench_task(task):
    gi, game_id, ai, algorithm, seed = task
    st = _WORKER_STATE
    game = st["games"][game_id]
    rng = np.random.default_rng([seed, gi, ai])
    return RUNNERS[algorithm](game, st["regs"][game_id], st["schedule"], st["T"],
                              gradient_mode=st["mode"], seed=seed, rng=rng,
                              record=st["record"])


def run_bench(cfg: dict, out_dir: Path, workers: int = 1) -> Path:
    games = {}
    regs_by_game = {}
    for spec in cfg["games"]:
        game = build_game(spec)
        games[game.game_id] = game
        regs_by_game[game.game_id] = regularizer_list(cfg["regularizers"], game.num_players)
    if not cfg["algorithms"]:
        raise ValueError("config key 'algorithms' must list at least one algorithm")
    algorithms = [_check_algorithm(a) for a in cfg["algorithms"]]
    schedule = _schedule_from(cfg.get("schedule", {}))
    T = int(cfg.get("T", 1000))
    record = _record_from(cfg.get("metrics", {}), T)
    mode = cfg.get("gradient_mode", "oracle")
    base, count = int(cfg["seeds"]["base"]), int(cfg["seeds"]["count"])

    game_ids = list(games)
    tasks = [(gi, gid, ai, alg, base + j)
             for gi, gid in enumerate(game_ids)
             for ai, alg in enumerate(algorithms)
             for j in range(count)]

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_bench_init,
                                 initargs=(games, regs_by_game, schedule, T, mode, record)) as ex:
            results = list(ex.map(_bench_task, tasks, chunksize=1))
    else:
        _bench_init(games, regs_by_game, schedule, T, mode, record)
        results = [_bench_task(t) for t in tasks]

    out_dir.mkdir(parents=True, exist_ok=True)
    for gid, game in games.items():
        save_game(game, out_dir / "games" / f"{gid}.json")
    csv_path = runio.write_trajectories(out_dir / "trajectories.csv", results)
    _write_summary(out_dir / "summary.csv", results, game_ids, algorithms)
    runio.write_manifest(
        out_dir / "manifest.json",
        config=cfg,
        games={gid: {"file": f"games/{gid}.json",
                     "sha256": runio.game_content_hash(game)}
               for gid, game in games.items()},
        runs=[{"run_id": runio.run_id(gid, alg, seed), "game_id": gid,
               "algorithm": alg, "seed": seed, "rng_key": [seed, gi, ai]}
              for gi, gid, ai, alg, seed in tasks],
        extra={"workers_used": workers},
    )
    return csv_path


def _write_summary(path: Path, trajectories, game_ids, algorithms) -> None:
    import csv as _csv

    rows = []
    for gid in game_ids:
        for alg in algorithms:
            runs = [t for t in trajectories if t.game_id == gid and t.algorithm == alg]
            if not runs:
                continue
            sg = np.array([t.final_smoothed_gap() for t in runs])
            ng = np.array([t.final_nash_gap() for t in runs])
            rows.append({
                "game_id": gid, "algorithm": alg, "seeds": len(runs),
                "final_smoothed_gap_mean": repr(float(np.mean(sg))),
                "final_smoothed_gap_std": repr(float(np.std(sg, ddof=1))) if len(runs) > 1 else "",
                "final_nash_gap_mean": repr(float(np.mean(ng))) if not np.isnan(ng).all() else "",
                "final_nash_gap_std": repr(float(np.std(ng, ddof=1))) if len(runs) > 1 and not np.isnan(ng).all() else "",
            })
    with path.open("w", newline="") as fh:
        w = _csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        w.writeheader()
        w.writerows(rows)


def cmd_bench(args) -> int:
    cfg = json.loads(json.dumps(DEFAULT_BENCH))  # deep copy
    if args.config:
        user = _load_yaml(args.config)
        for key, val in user.items():
            if isinstance(val, dict) and isinstance(cfg.get(key), dict):
                cfg[key].update(val)
            else:
                cfg[key] = val
    if args.T:
        cfg["T"] = args.T
    if args.seeds:
        cfg["seeds"]["count"] = args.seeds
    if args.large:
        cfg["games"].append({"family": "monotone", "n": 1000, "mu": 1.0,
                             "skew": 0.3, "seed": 105})
        cfg["metrics"].setdefault("every", 50)
    if args.dump_config:
        print(yaml.safe_dump(cfg, sort_keys=False))
        return 0
    out_dir = Path(args.out_dir) if args.out_dir else default_out_dir() / f"bench-{cfg['name']}"
    csv_path = run_bench(cfg, out_dir, workers=args.workers)
    print(csv_path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gqre",
        description="Generalized quantal response equilibria: solve, verify, benchmark.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a game file")
    p.add_argument("--family", required=True,
                   choices=["matching_pennies", "monotone", "rank_k"])
    p.add_argument("--n", type=int, help="actions per player (monotone)")
    p.add_argument("--m", type=int, help="actions per player (rank_k)")
    p.add_argument("--k", type=int, help="rank of the payoff sum (rank_k)")
    p.add_argument("--mu", type=float, help="monotonicity strength (monotone)")
    p.add_argument("--skew", type=float, help="spectral norm of the antisymmetric part")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output file (default: <out-dir>/<game_id>.json)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("respond", help="closed-form quantal response to a utility vector")
    p.add_argument("--kind", required=True)
    p.add_argument("--lam", "--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--alpha", type=float)
    p.add_argument("--u", required=True, help="comma-separated utilities")
    p.add_argument("--reference", help="comma-separated reference distribution")
    p.add_argument("--support-points", help="comma-separated support points (squared_mean)")
    p.set_defaults(func=cmd_respond)

    p = sub.add_parser("verify", help="check whether a profile is an equilibrium")
    p.add_argument("--game", required=True)
    p.add_argument("--profile", required=True, help="JSON file with 'dists'")
    p.add_argument("--regs", help="inline YAML/JSON regularizer spec, or @file")
    p.add_argument("--kind", default="entropy")
    p.add_argument("--lam", "--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--alpha", type=float)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("solve", help="run one algorithm on one game")
    p.add_argument("--config", help="YAML config; flags override")
    p.add_argument("--game", help="game JSON file")
    p.add_argument("--family", choices=["matching_pennies", "monotone", "rank_k"])
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--mu", type=float)
    p.add_argument("--skew", type=float)
    p.add_argument("--game-seed", type=int)
    p.add_argument("--algorithm", help=f"one of {', '.join(ALGORITHMS)}")
    p.add_argument("--T", type=int)
    p.add_argument("--gradient-mode", choices=["exact", "oracle"])
    p.add_argument("--schedule", choices=["theorem", "fixed"])
    p.add_argument("--eta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--M", type=int)
    p.add_argument("--kind")
    p.add_argument("--lam", "--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--alpha", type=float)
    p.add_argument("--every", type=int)
    p.add_argument("--nash-gap", action="store_true")
    p.add_argument("--seed", type=int, help="single seed")
    p.add_argument("--seeds", type=int, help="number of seeds")
    p.add_argument("--seed-base", type=int)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run the benchmark matrix from a config")
    p.add_argument("--config", help="YAML config merged over the built-in protocol")
    p.add_argument("--T", type=int)
    p.add_argument("--seeds", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir")
    p.add_argument("--large", action="store_true",
                   help="add the 1000-action monotone game (sparse metric cadence)")
    p.add_argument("--dump-config", action="store_true",
                   help="print the resolved config and exit")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
