import matplotlib
import pytest
import yaml

matplotlib.use("Agg")


@pytest.fixture(scope="session")
def bench_csv(tmp_path_factory):
    """A small real benchmark CSV produced by the solver harness."""
    from gqre.cli import main as gqre_main

    root = tmp_path_factory.mktemp("bench")
    cfg = root / "cfg.yaml"
    cfg.write_text(yaml.safe_dump({
        "name": "plots-fixture",
        "T": 12,
        "gradient_mode": "oracle",
        "schedule": {"mode": "theorem", "eta": 1.0, "M": 5},
        "regularizers": {"kind": "entropy", "lambda": 1.0},
        "seeds": {"base": 0, "count": 3},
        "metrics": {"nash_gap": True, "smoothed_gap": True, "every": 3},
        "algorithms": ["smoothed_fw", "hard_fw", "extragradient", "ogd",
                       "adaptive_pgd"],
        "games": [{"family": "matching_pennies"},
                  {"family": "monotone", "n": 3, "mu": 1.0, "skew": 0.3,
                   "seed": 9}],
    }))
    out = root / "run"
    assert gqre_main(["bench", "--config", str(cfg), "--out-dir", str(out)]) == 0
    return out / "trajectories.csv"
