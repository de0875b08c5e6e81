"""Simulated-play oracle: gradient estimates from observed actions and payoffs.

A batch of M independent joint plays is drawn from the current profile.
The per-player sufficient statistics are the action counts and the
cumulative payoffs

    U_i(a) = sum over plays m of u_i(A(m)) * 1{A_i(m) = a},

from which lam_i * U_i(a) / (M * pi_i(a)) is an unbiased estimate of the
utility component of the perturbed gradient (importance weighting over the
player's own mixture). Its variance is available in closed form for tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .games import Game, StrategyProfile, _check_profile, tensor_action_values
from .regularizers import SingularityError, reg_gradient


@dataclass
class OracleReport:
    """Sufficient statistics of one simulated batch."""

    counts: list[np.ndarray]        # per player, how often each action was played
    cum_payoffs: list[np.ndarray]   # per player, summed payoffs tagged by own action
    num_plays: int
    profile: StrategyProfile        # snapshot of the sampling profile


@dataclass
class GradientEstimate:
    """One player's gradient estimate from an OracleReport."""

    player: int
    raw: np.ndarray        # lam * U / (M * pi), the utility part
    estimate: np.ndarray   # raw minus the penalty gradient at the sampling profile


def simulate(game: Game, profile: StrategyProfile, num_plays: int, rng) -> OracleReport:
    """Draw num_plays joint actions i.i.d. from profile and tally statistics.

    Each play samples every player independently by inverse CDF over that
    player's mixture; plays are independent of each other. Sampling order is
    player 0, 1, ... so a fixed rng state reproduces the batch exactly.
    """
    _check_profile(game, profile)
    num_plays = int(num_plays)
    if num_plays < 1:
        raise ValueError(f"num_plays must be >= 1, got {num_plays}")
    actions = []
    for d in profile.dists:
        cdf = np.cumsum(d)
        idx = np.searchsorted(cdf, rng.random(num_plays), side="right")
        actions.append(np.minimum(idx, d.size - 1))
    joint = tuple(actions)
    counts, cums = [], []
    for i, d in enumerate(profile.dists):
        payoffs = game.utilities[i][joint]
        counts.append(np.bincount(actions[i], minlength=d.size).astype(np.int64))
        cums.append(np.bincount(actions[i], weights=payoffs, minlength=d.size))
    return OracleReport(counts, cums, num_plays, profile.copy())


def estimate_gradient(report: OracleReport, regs, player: int) -> GradientEstimate:
    """Unbiased perturbed-gradient estimate for one player.

    raw_a = lam * U(a) / (M * pi(a)); the estimate subtracts the exact
    penalty gradient at the sampling profile. lam = 0 short-circuits to a
    zero raw part. Actions never played contribute raw 0 through U(a) = 0.
    """
    pi = report.profile.dists[player]
    lam = regs[player].lam
    if lam == 0.0:
        raw = np.zeros_like(pi)
    else:
        if pi.min() <= 0.0:
            raise SingularityError(
                f"player {player} samples a zero-probability action; importance "
                "weights are undefined (use an exploration floor)"
            )
        raw = lam * report.cum_payoffs[player] / (report.num_plays * pi)
    return GradientEstimate(player, raw, raw - reg_gradient(regs[player], pi))


def estimate_gradients(report: OracleReport, regs) -> list[np.ndarray]:
    """All players' gradient estimates (the effective ones)."""
    return [estimate_gradient(report, regs, i).estimate
            for i in range(len(report.profile.dists))]


def theoretical_variance(game: Game, profile: StrategyProfile, player: int,
                         action: int, lam: float, num_plays: int) -> float:
    """Exact variance of raw_a = lam * U(a) / (M * pi(a)) under simulate().

    Var = lam^2 * vtilde / (M * pi(a)) with
    vtilde = E_{others}[u^2(a, .)] - pi(a) * (E_{others}[u(a, .)])^2.
    """
    _check_profile(game, profile)
    d = profile.dists[player]
    if d[action] <= 0.0:
        raise SingularityError("variance undefined for a zero-probability action")
    mean_u = tensor_action_values(game.utilities[player], profile.dists, player)[action]
    mean_u2 = tensor_action_values(game.utilities[player] ** 2, profile.dists, player)[action]
    vtilde = float(mean_u2) - float(d[action]) * float(mean_u) ** 2
    return lam**2 * vtilde / (num_plays * float(d[action]))
