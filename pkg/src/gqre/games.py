"""Finite normal-form games with divergence-perturbed utilities.

Players 0..N-1 each choose from a finite action set. Player i's utility
tensor has shape (|A_0|, ..., |A_{N-1}|), stored row-major so axis j
indexes player j's action; serialized files keep the same flat C-order
layout. The perturbed utility of a mixed profile pi is

    u_i^f(pi) = lam_i * E_pi[u_i] - f_i(pi_i)

with f_i a convex divergence from ``regularizers``. This module holds the
game and profile containers, the expected-utility algebra (values,
gradients, Jacobian), a sufficient-condition check for uniqueness of the
equilibrium, generators for the benchmark game families, and JSON
serialization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .regularizers import Regularizer, reg_gradient, reg_hessian


@dataclass
class Game:
    """A finite normal-form game.

    action_counts   number of actions per player
    utilities       one float tensor per player, shape tuple(action_counts)
    normalized      True when all utilities jointly lie in [0, 1]
    metadata        generator provenance (seed, parameters, pre-normalization
                    tensors) plus an optional game_id
    """

    action_counts: list[int]
    utilities: list[np.ndarray]
    normalized: bool = False
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.action_counts = [int(c) for c in self.action_counts]
        if len(self.action_counts) < 1 or any(c < 1 for c in self.action_counts):
            raise ValueError(f"action_counts must be positive, got {self.action_counts}")
        if len(self.utilities) != len(self.action_counts):
            raise ValueError(
                f"utilities has {len(self.utilities)} tensors for "
                f"{len(self.action_counts)} players"
            )
        shape = tuple(self.action_counts)
        tensors = []
        for i, u in enumerate(self.utilities):
            u = np.asarray(u, dtype=float)
            if u.shape != shape:
                raise ValueError(
                    f"utilities[{i}] has shape {u.shape}, expected {shape}"
                )
            if not np.all(np.isfinite(u)):
                raise ValueError(f"utilities[{i}] contains non-finite entries")
            tensors.append(u)
        self.utilities = tensors

    @property
    def num_players(self) -> int:
        return len(self.action_counts)

    @property
    def max_actions(self) -> int:
        return max(self.action_counts)

    @property
    def game_id(self) -> str:
        return self.metadata.get("game_id", "game")


@dataclass
class StrategyProfile:
    """A mixed strategy per player, optionally with an exploration floor.

    When floor > 0 every entry must sit at or above it (the floor is the
    epsilon used by the projected iterates of the solvers).
    """

    dists: list[np.ndarray]
    floor: float = 0.0

    def __post_init__(self):
        self.floor = float(self.floor)
        if self.floor < 0:
            raise ValueError(f"floor must be nonnegative, got {self.floor}")
        dists = []
        for i, d in enumerate(self.dists):
            d = np.asarray(d, dtype=float)
            if d.ndim != 1 or d.size == 0:
                raise ValueError(f"dists[{i}] must be a non-empty 1-D array")
            if not np.all(np.isfinite(d)):
                raise ValueError(f"dists[{i}] contains non-finite entries")
            if d.min() < -1e-12:
                raise ValueError(f"dists[{i}] has a negative entry: {d.min()}")
            if abs(d.sum() - 1.0) > 1e-9:
                raise ValueError(f"dists[{i}] sums to {d.sum()}, expected 1")
            if self.floor > 0:
                if self.floor > 1.0 / d.size + 1e-12:
                    raise ValueError(
                        f"floor {self.floor} exceeds 1/{d.size} for player {i}"
                    )
                if d.min() < self.floor - 1e-12:
                    raise ValueError(
                        f"dists[{i}] violates floor {self.floor}: min {d.min()}"
                    )
            dists.append(d)
        self.dists = dists

    @classmethod
    def uniform(cls, action_counts, floor: float = 0.0) -> "StrategyProfile":
        return cls([np.full(int(c), 1.0 / int(c)) for c in action_counts], floor)

    def copy(self) -> "StrategyProfile":
        return StrategyProfile([d.copy() for d in self.dists], self.floor)


def _check_profile(game: Game, profile: StrategyProfile) -> None:
    if len(profile.dists) != game.num_players:
        raise ValueError(
            f"profile has {len(profile.dists)} players, game has {game.num_players}"
        )
    for i, (d, c) in enumerate(zip(profile.dists, game.action_counts)):
        if d.size != c:
            raise ValueError(f"dists[{i}] has {d.size} actions, game has {c}")


def tensor_action_values(tensor: np.ndarray, dists, player: int) -> np.ndarray:
    """Contract every axis of tensor except `player` with the other mixtures."""
    t = tensor
    for ax in range(len(dists) - 1, -1, -1):
        if ax == player:
            continue
        t = np.tensordot(t, dists[ax], axes=(ax, 0))
    return t


def action_values(game: Game, profile: StrategyProfile, player: int) -> np.ndarray:
    """Expected utility of each of `player`'s actions against the others' mixtures."""
    _check_profile(game, profile)
    return tensor_action_values(game.utilities[player], profile.dists, player)


def expected_utility(game: Game, profile: StrategyProfile, player: int) -> float:
    """Multilinear expected utility E_pi[u_player]."""
    _check_profile(game, profile)
    return float(action_values(game, profile, player) @ profile.dists[player])


def pure_utility(game: Game, actions, player: int) -> float:
    """Utility of a pure joint action tuple."""
    return float(game.utilities[player][tuple(int(a) for a in actions)])


def payoff_gradient(game: Game, regs, profile: StrategyProfile, player: int) -> np.ndarray:
    """Gradient of the perturbed utility in player's own strategy.

    Component a is lam_i * E[u_i(a, others)] - (grad f_i(pi_i))_a. Raises
    SingularityError through reg_gradient at boundary points of penalties
    whose gradient blows up there.
    """
    w = action_values(game, profile, player)
    return regs[player].lam * w - reg_gradient(regs[player], profile.dists[player])


def _pair_values(game: Game, profile: StrategyProfile, i: int, j: int) -> np.ndarray:
    """E over everyone but i, j of u_i, as a matrix indexed (a_i, a_j)."""
    t = game.utilities[i]
    for ax in range(game.num_players - 1, -1, -1):
        if ax in (i, j):
            continue
        t = np.tensordot(t, profile.dists[ax], axes=(ax, 0))
    return t if i < j else t.T


def game_jacobian(game: Game, regs, profile: StrategyProfile) -> np.ndarray:
    """Jacobian H of the stacked perturbed-utility gradients.

    Block (i, i) is -hess f_i(pi_i); block (i, j) is lam_i times the mixed
    second derivative of E[u_i] in (pi_i, pi_j). For two players that is
    [[-hess f_1, lam_1*A], [lam_2*B^T, -hess f_2]] with A, B the payoff
    matrices.
    """
    _check_profile(game, profile)
    counts = game.action_counts
    offsets = np.concatenate([[0], np.cumsum(counts)])
    H = np.zeros((offsets[-1], offsets[-1]))
    for i in range(game.num_players):
        si = slice(offsets[i], offsets[i + 1])
        H[si, si] = -reg_hessian(regs[i], profile.dists[i])
        for j in range(game.num_players):
            if j == i:
                continue
            sj = slice(offsets[j], offsets[j + 1])
            H[si, sj] = regs[i].lam * _pair_values(game, profile, i, j)
    return H


@dataclass
class DominanceReport:
    """Largest eigenvalue of H + H^T at each probed profile."""

    max_eigenvalues: np.ndarray
    all_negative_definite: bool


def check_diagonal_dominance(game: Game, regs, profiles) -> DominanceReport:
    """Check the uniqueness condition H + H^T < 0 at a batch of profiles.

    When it holds everywhere the perturbed game is strictly monotone and the
    equilibrium is unique.
    """
    eigs = []
    for prof in profiles:
        H = game_jacobian(game, regs, prof)
        eigs.append(float(np.linalg.eigvalsh(H + H.T)[-1]))
    eigs = np.asarray(eigs)
    return DominanceReport(eigs, bool(np.all(eigs < 0.0)))


def normalize_utilities(game: Game) -> Game:
    """Affinely map all players' utilities jointly onto [0, 1].

    The same x -> (x - min) / (max - min) is applied to every entry of every
    player's tensor, so best responses and equilibria are preserved up to
    the common positive scale. A constant game maps to all zeros. The
    original tensors are kept in metadata["pre_normalization"].
    """
    values = np.concatenate([u.ravel() for u in game.utilities])
    lo, hi = float(values.min()), float(values.max())
    pre = {
        "utilities": [u.tolist() for u in game.utilities],
        "min": lo,
        "max": hi,
    }
    if hi - lo <= 0.0:
        scaled = [np.zeros_like(u) for u in game.utilities]
    else:
        scaled = [(u - lo) / (hi - lo) for u in game.utilities]
    meta = dict(game.metadata)
    meta["pre_normalization"] = pre
    return Game(list(game.action_counts), scaled, normalized=True, metadata=meta)


def gen_matching_pennies() -> Game:
    """Zero-sum 2x2 matching pennies, A = [[1,-1],[-1,1]], B = -A, normalized."""
    A = np.array([[1.0, -1.0], [-1.0, 1.0]])
    game = Game([2, 2], [A, -A], metadata={"game_id": "matching_pennies",
                                           "generator": "matching_pennies",
                                           "seed": None})
    return normalize_utilities(game)


def _as_rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def gen_strongly_monotone(n: int, mu: float = 1.0, skew: float = 0.3, seed=None) -> Game:
    """Two-player n x n game with A = mu*I + K, B = mu*I - K, K antisymmetric.

    K is a Gaussian antisymmetric matrix rescaled to spectral norm `skew`
    (zero when skew = 0). Before normalization A + B = 2*mu*I exactly: the
    diagonal of K is zero, so no floating-point rounding enters the sum.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if skew < 0:
        raise ValueError(f"skew must be nonnegative, got {skew}")
    rng = _as_rng(seed)
    raw = rng.standard_normal((n, n))
    K = 0.5 * (raw - raw.T)
    norm = float(np.linalg.norm(K, 2))
    K = K * (skew / norm) if (skew > 0 and norm > 0) else np.zeros((n, n))
    S = mu * np.eye(n)
    A, B = S + K, S - K
    meta = {
        "game_id": f"monotone-n{n}-seed{_seed_label(seed)}",
        "generator": "strongly_monotone",
        "seed": _seed_value(seed),
        "mu": float(mu),
        "skew": float(skew),
    }
    return normalize_utilities(Game([n, n], [A, B], metadata=meta))


def gen_rank_k(m: int, k: int, seed=None) -> Game:
    """Two-player m x m game whose payoff sum A + B has rank k.

    A = U V^T + S and B = U V^T - S with U, V Gaussian m x k factors and S
    a Gaussian antisymmetric matrix, so A + B = 2 U V^T.
    """
    if m < 1 or k < 1 or k > m:
        raise ValueError(f"need 1 <= k <= m, got m={m}, k={k}")
    rng = _as_rng(seed)
    U = rng.standard_normal((m, k))
    V = rng.standard_normal((m, k))
    M = U @ V.T
    raw = rng.standard_normal((m, m))
    S = 0.5 * (raw - raw.T)
    meta = {
        "game_id": f"rank{k}-m{m}-seed{_seed_label(seed)}",
        "generator": "rank_k",
        "seed": _seed_value(seed),
        "k": int(k),
    }
    return normalize_utilities(Game([m, m], [M + S, M - S], metadata=meta))


def _seed_value(seed):
    return int(seed) if isinstance(seed, (int, np.integer)) else None


def _seed_label(seed):
    v = _seed_value(seed)
    return "rng" if v is None else str(v)


def game_to_dict(game: Game) -> dict:
    return {
        "players": game.num_players,
        "action_counts": list(game.action_counts),
        "utilities": [u.ravel(order="C").tolist() for u in game.utilities],
        "normalized": bool(game.normalized),
        "metadata": game.metadata,
    }


def game_from_dict(d: dict) -> Game:
    for key in ("players", "action_counts", "utilities"):
        if key not in d:
            raise ValueError(f"game file is missing required field '{key}'")
    counts = [int(c) for c in d["action_counts"]]
    if int(d["players"]) != len(counts):
        raise ValueError(
            f"field 'players' ({d['players']}) disagrees with "
            f"'action_counts' length ({len(counts)})"
        )
    size = int(np.prod(counts))
    shape = tuple(counts)
    tensors = []
    for i, flat in enumerate(d["utilities"]):
        arr = np.asarray(flat, dtype=float)
        if arr.size != size:
            raise ValueError(
                f"field 'utilities[{i}]' has {arr.size} entries, expected {size}"
            )
        tensors.append(arr.reshape(shape, order="C"))
    return Game(counts, tensors, normalized=bool(d.get("normalized", False)),
                metadata=d.get("metadata", {}))


def save_game(game: Game, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(game_to_dict(game)))
    return path


def load_game(path) -> Game:
    return game_from_dict(json.loads(Path(path).read_text()))
