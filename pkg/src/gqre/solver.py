"""Smoothed Frank-Wolfe solver for perturbed-utility equilibria.

Each iteration replaces the Frank-Wolfe vertex argmax with a smoothed
best response inside the current iterate,

    s_a  proportional to  pi_a * exp(g_a / eta),

projects it onto the epsilon-floored simplex (an exploration guarantee that
keeps importance weights bounded in simulated-play mode), and moves

    pi <- pi + gamma_t * (s - pi).

Gradients g come either from the exact expected-utility algebra or from the
simulated-play oracle. The diminishing schedule gamma_t = 1/(t+1),
epsilon_t = 1/((t+1) * max|A_i|), M_t = ceil(1/(epsilon_t gamma_t^2))
drives the expected smoothed gap to zero; fixed values are supported for
long benchmark runs.

The same loop (gradients -> update -> record) also powers the baselines in
``baselines``; only the update rule differs, so exact and simulated modes
exercise identical code paths.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._simplex import project_simplex
from .games import Game, StrategyProfile, payoff_gradient
from .oracle import estimate_gradients, simulate

ALGORITHMS = ("smoothed_fw", "hard_fw", "extragradient", "ogd", "adaptive_pgd")


def smoothed_direction(g, pi, eta: float) -> np.ndarray:
    """Softmax of g/eta reweighted by the current iterate pi.

    Entries where pi_a = 0 stay exactly 0; eta -> infinity returns pi itself.
    Computed with the usual max-shift so large gradients do not overflow.
    """
    g = np.asarray(g, dtype=float)
    pi = np.asarray(pi, dtype=float)
    if g.shape != pi.shape:
        raise ValueError(f"g has shape {g.shape}, pi has shape {pi.shape}")
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    support = pi > 0
    if not support.any():
        raise ValueError("pi has no support")
    z = np.full_like(pi, -np.inf)
    z[support] = np.log(pi[support]) + g[support] / eta
    z -= z[support].max()
    s = np.where(support, np.exp(z), 0.0)
    return s / s.sum()


def epsilon_projection(s, eps: float) -> np.ndarray:
    """Euclidean projection of s onto {p : p >= eps, sum(p) = 1}.

    Substituting p = eps + q reduces this to projecting s - eps onto the
    simplex of mass 1 - n*eps, solved exactly by the sorted-threshold rule.
    eps = 0 is the plain simplex projection; eps = 1/n forces uniform.
    """
    s = np.asarray(s, dtype=float)
    n = s.size
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    mass = 1.0 - n * eps
    if mass < -1e-9:
        raise ValueError(f"eps {eps} exceeds 1/{n}; the floored simplex is empty")
    return project_simplex(s - eps, max(mass, 0.0)) + eps


def theorem_schedule(t: int, max_actions: int) -> tuple[float, float, int]:
    """The diminishing (gamma_t, epsilon_t, M_t) triple at iteration t >= 1."""
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    gamma = 1.0 / (t + 1)
    eps = 1.0 / ((t + 1) * max_actions)
    M = math.ceil(1.0 / (eps * gamma * gamma))
    return gamma, eps, M


@dataclass(frozen=True)
class Schedule:
    """Step-size / exploration / sample-size schedule plus the smoothing eta.

    mode="theorem" uses the diminishing triple above; setting M fixes the
    sample size while keeping the diminishing gamma_t and epsilon_t (the
    long-horizon benchmark protocol). mode="fixed" holds all three constant;
    M may stay None in exact-gradient runs.
    """

    mode: str = "theorem"
    eta: float = 1.0
    gamma: float | None = None
    epsilon: float | None = None
    M: int | None = None

    def __post_init__(self):
        if self.mode not in ("theorem", "fixed"):
            raise ValueError(f"mode must be 'theorem' or 'fixed', got {self.mode!r}")
        if self.eta <= 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.mode == "fixed":
            if self.gamma is None or self.epsilon is None:
                raise ValueError("fixed mode needs explicit gamma and epsilon")
            if not (0.0 < self.gamma < 1.0):
                raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
            if self.epsilon < 0:
                raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")
        if self.M is not None and self.M < 1:
            raise ValueError(f"M must be >= 1, got {self.M}")

    def values(self, t: int, max_actions: int) -> tuple[float, float, int | None]:
        if self.mode == "theorem":
            gamma, eps, M = theorem_schedule(t, max_actions)
            return gamma, eps, (self.M if self.M is not None else M)
        return self.gamma, self.epsilon, self.M

    def describe(self) -> dict:
        return {"mode": self.mode, "eta": self.eta, "gamma": self.gamma,
                "epsilon": self.epsilon, "M": self.M}


@dataclass
class RecordOptions:
    """Which metrics to evaluate along the trajectory and how often.

    Gaps are always evaluated with exact gradients (measurement is free of
    oracle noise) and always at the final iteration regardless of cadence.
    """

    smoothed_gap: bool = True
    nash_gap: bool = False
    every: int = 1
    keep_profiles: bool = False


@dataclass
class Trajectory:
    """Per-iteration records of one run."""

    algorithm: str
    game_id: str
    seed: int | None
    eta: float
    iterations: np.ndarray
    gamma: np.ndarray
    epsilon: np.ndarray
    M: np.ndarray             # nan where gradients were exact
    smoothed_gap: np.ndarray  # nan where not evaluated
    nash_gap: np.ndarray      # nan where not evaluated
    wall_ms: np.ndarray
    final: StrategyProfile
    profiles: list[StrategyProfile] | None = None
    metadata: dict = field(default_factory=dict)

    def final_smoothed_gap(self) -> float:
        vals = self.smoothed_gap[~np.isnan(self.smoothed_gap)]
        return float(vals[-1]) if vals.size else float("nan")

    def final_nash_gap(self) -> float:
        vals = self.nash_gap[~np.isnan(self.nash_gap)]
        return float(vals[-1]) if vals.size else float("nan")


def _initial_dists(game: Game, init, eps1: float):
    if init is None or (isinstance(init, str) and init == "uniform"):
        return [np.full(c, 1.0 / c) for c in game.action_counts], False
    dists = init.dists if isinstance(init, StrategyProfile) else [np.asarray(d, float) for d in init]
    if len(dists) != game.num_players:
        raise ValueError(f"init has {len(dists)} players, game has {game.num_players}")
    projected = False
    out = []
    for d, c in zip(dists, game.action_counts):
        if d.size != c:
            raise ValueError(f"init distribution has {d.size} actions, game has {c}")
        if d.min() < eps1 - 1e-12:
            d = epsilon_projection(d, eps1)
            projected = True
        out.append(d.copy())
    return out, projected


def _run_loop(game: Game, regs, schedule: Schedule, T: int, update, *, algorithm: str,
              gradient_mode="exact", init="uniform", seed=None, rng=None,
              record: RecordOptions | None = None) -> Trajectory:
    """Shared driver: per iteration fetch gradients, apply `update`, record.

    update(t, dists, grad_fn, gamma, eps) returns the next list of
    distributions; grad_fn maps a list of distributions to the list of
    per-player gradients so two-call rules (extragradient) resample freely.
    gradient_mode is "exact", "oracle", or a callable with the oracle
    provider's signature for testing that the loop is mode-agnostic.
    """
    from .metrics import nash_gap as _nash_gap
    from .metrics import smoothed_gap as _smoothed_gap

    if T < 0:
        raise ValueError(f"T must be >= 0, got {T}")
    if len(regs) != game.num_players:
        raise ValueError(f"got {len(regs)} regularizers for {game.num_players} players")
    record = record or RecordOptions()
    if record.every < 1:
        raise ValueError(f"record cadence must be >= 1, got {record.every}")
    max_actions = game.max_actions
    min_count = min(game.action_counts)
    if schedule.mode == "fixed" and schedule.epsilon > 1.0 / min_count + 1e-12:
        raise ValueError(
            f"epsilon {schedule.epsilon} exceeds 1/{min_count}; floored simplices are empty"
        )
    if gradient_mode not in ("exact", "oracle") and not callable(gradient_mode):
        raise ValueError(f"gradient_mode must be 'exact', 'oracle' or callable, got {gradient_mode!r}")
    seed_value = int(seed) if isinstance(seed, (int, np.integer)) else None
    if rng is None:
        rng = np.random.default_rng(seed)

    eps1 = schedule.values(1, max_actions)[1]
    dists, init_projected = _initial_dists(game, init, eps1)

    cols = {k: np.full(T, np.nan) for k in
            ("gamma", "epsilon", "M", "smoothed_gap", "nash_gap", "wall_ms")}
    its = np.arange(1, T + 1)
    kept = [] if record.keep_profiles else None

    for t in its:
        gamma, eps, M = schedule.values(int(t), max_actions)
        if gradient_mode == "exact":
            def grad_fn(ds):
                prof = StrategyProfile(ds)
                return [payoff_gradient(game, regs, prof, i) for i in range(game.num_players)]
        elif gradient_mode == "oracle":
            if M is None:
                raise ValueError("oracle mode needs a sample size M in the schedule")
            def grad_fn(ds, _M=M):
                report = simulate(game, StrategyProfile(ds), _M, rng)
                return estimate_gradients(report, regs)
        else:
            def grad_fn(ds, _M=M):
                return gradient_mode(game, regs, ds, _M, rng)

        t0 = time.perf_counter()
        dists = update(int(t), dists, grad_fn, gamma, eps)
        cols["wall_ms"][t - 1] = (time.perf_counter() - t0) * 1000.0
        cols["gamma"][t - 1] = gamma
        cols["epsilon"][t - 1] = eps
        if gradient_mode != "exact" and M is not None:
            cols["M"][t - 1] = M

        if (t % record.every == 0) or (t == T):
            prof = StrategyProfile(dists)
            if record.smoothed_gap:
                cols["smoothed_gap"][t - 1] = _smoothed_gap(game, regs, prof, schedule.eta).V
            if record.nash_gap:
                cols["nash_gap"][t - 1] = _nash_gap(game, regs, prof).epsilon
        if kept is not None:
            kept.append(StrategyProfile(dists, floor=min(eps, min(d.min() for d in dists))))

    final_eps = schedule.values(T, max_actions)[1]
    final = StrategyProfile(dists, floor=min(final_eps, min(d.min() for d in dists)))
    return Trajectory(
        algorithm=algorithm, game_id=game.game_id, seed=seed_value, eta=schedule.eta,
        iterations=its, gamma=cols["gamma"], epsilon=cols["epsilon"], M=cols["M"],
        smoothed_gap=cols["smoothed_gap"], nash_gap=cols["nash_gap"],
        wall_ms=cols["wall_ms"], final=final, profiles=kept,
        metadata={"gradient_mode": gradient_mode if isinstance(gradient_mode, str) else "custom",
                  "schedule": schedule.describe(), "T": int(T),
                  "init_projected": init_projected},
    )


class _SmoothedFW:
    def __init__(self, eta):
        self.eta = eta

    def __call__(self, t, dists, grad_fn, gamma, eps):
        grads = grad_fn(dists)
        out = []
        for pi, g in zip(dists, grads):
            s = epsilon_projection(smoothed_direction(g, pi, self.eta), eps)
            out.append(pi + gamma * (s - pi))
        return out


def run_smoothed_fw(game: Game, regs, schedule: Schedule, T: int, **kwargs) -> Trajectory:
    """Run the smoothed Frank-Wolfe iteration for T steps.

    kwargs: gradient_mode ("exact" / "oracle"), init ("uniform", a
    StrategyProfile, or per-player arrays; floors below epsilon_1 are
    projected up and noted in metadata), seed or rng, record
    (RecordOptions).
    """
    return _run_loop(game, regs, schedule, T, _SmoothedFW(schedule.eta),
                     algorithm="smoothed_fw", **kwargs)
