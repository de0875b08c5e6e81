"""Equilibrium gap measures and verification.

The smoothed gap of player i at profile pi with exact perturbed gradient g is

    V_i = eta * log <pi_i, exp(g / eta)> - <pi_i, g>,

a log-partition minus its linearization: nonnegative by Jensen and zero
exactly when g is constant on the support of pi_i, i.e. at an equilibrium of
the perturbed game. Its analytic gradient in the full profile is

    L = -F + H^T (s* - pi) + lambda,   lambda_i = eta * exp(F_i/eta) / <pi_i, exp(F_i/eta)>,

with F the stacked gradients, H the Jacobian from ``games`` and s* the
smoothed directions. Verification offers the pure-direction slack test and
the Nash-style gap against each player's closed-form quantal response.

All measurements use exact gradients regardless of how a trajectory was
generated; simulated-play noise never enters the metrics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .games import Game, StrategyProfile, action_values, game_jacobian, payoff_gradient
from .regularizers import qr_objective, quantal_response
from .solver import smoothed_direction


@dataclass
class GapReport:
    """Filled piecewise by the ops below; the CLI merges a full one."""

    V: float | None = None                 # total smoothed gap
    V_i: list[float] | None = None
    slack_i: list[float] | None = None     # best pure improvement per player
    epsilon_i: list[float] | None = None   # quantal-response regret per player
    epsilon: float | None = None           # max_i epsilon_i
    is_gqre: bool | None = None


def _logsumexp(z: np.ndarray) -> float:
    m = float(z.max())
    return m + float(np.log(np.exp(z - m).sum()))


def smoothed_gap(game: Game, regs, profile: StrategyProfile, eta: float) -> GapReport:
    """Per-player and total smoothed gap V at a profile (exact gradients)."""
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    per = []
    for i in range(game.num_players):
        g = payoff_gradient(game, regs, profile, i)
        pi = profile.dists[i]
        support = pi > 0
        z = np.log(pi[support]) + g[support] / eta
        v = eta * _logsumexp(z) - float(pi @ g)
        if v < -1e-9:
            raise ArithmeticError(f"smoothed gap came out {v}; gradient inconsistency")
        per.append(max(v, 0.0))
    return GapReport(V=float(sum(per)), V_i=per)


def smoothed_gap_gradient(game: Game, regs, profile: StrategyProfile, eta: float) -> np.ndarray:
    """Gradient of the total smoothed gap in the stacked profile coordinates."""
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    grads = [payoff_gradient(game, regs, profile, i) for i in range(game.num_players)]
    H = game_jacobian(game, regs, profile)
    F = np.concatenate(grads)
    s = np.concatenate([smoothed_direction(g, d, eta)
                        for g, d in zip(grads, profile.dists)])
    pi = np.concatenate(profile.dists)
    lam_parts = []
    for g, d in zip(grads, profile.dists):
        w = np.exp((g - g.max()) / eta)
        lam_parts.append(eta * w / float(d @ w))
    return -F + H.T @ (s - pi) + np.concatenate(lam_parts)


def verify_gqre_pure(game: Game, regs, profile: StrategyProfile,
                     tol: float = 1e-6) -> GapReport:
    """Best pure-direction improvement of the perturbed utility per player.

    slack_i = max_a g_a - <pi_i, g>; at an equilibrium every slack is <= 0
    up to tolerance. For total_variation the gradient is a subgradient, so
    this test is advisory there; the epsilon of nash_gap is the
    authoritative certificate for nonsmooth penalties.
    """
    slacks = []
    for i in range(game.num_players):
        g = payoff_gradient(game, regs, profile, i)
        slacks.append(float(g.max() - profile.dists[i] @ g))
    return GapReport(slack_i=slacks, is_gqre=bool(max(slacks) <= tol))


def nash_gap(game: Game, regs, profile: StrategyProfile) -> GapReport:
    """Per-player regret against the closed-form quantal response.

    epsilon_i = [lam_i <xi, w> - f_i(xi)] - [lam_i <pi_i, w> - f_i(pi_i)]
    with w the action values against the others and xi = quantal_response.
    Nonnegative because xi maximizes the bracketed objective.
    """
    eps = []
    for i in range(game.num_players):
        w = action_values(game, profile, i)
        xi = quantal_response(regs[i], w)
        gap = qr_objective(regs[i], w, xi) - qr_objective(regs[i], w, profile.dists[i])
        if gap < -1e-10:
            raise ArithmeticError(
                f"player {i} quantal response lost to the profile by {gap}; "
                "closed form inconsistent"
            )
        eps.append(max(gap, 0.0))
    return GapReport(epsilon_i=eps, epsilon=float(max(eps)))


def equilibrium_report(game: Game, regs, profile: StrategyProfile,
                       eta: float = 1.0, tol: float = 1e-6) -> GapReport:
    """Merge all three measurements into one report (used by verification).

    The quantal-response regret is finite everywhere the penalties are, so
    it always appears; the gradient-based V and slack are dropped (left None)
    at boundary profiles where the gradient is singular, and the verdict then
    rests on the regret alone.
    """
    from .regularizers import SingularityError

    ng = nash_gap(game, regs, profile)
    try:
        sg = smoothed_gap(game, regs, profile, eta)
        pure = verify_gqre_pure(game, regs, profile, tol)
    except SingularityError:
        return GapReport(epsilon_i=ng.epsilon_i, epsilon=ng.epsilon,
                         is_gqre=bool(ng.epsilon <= tol))
    return GapReport(V=sg.V, V_i=sg.V_i, slack_i=pure.slack_i,
                     epsilon_i=ng.epsilon_i, epsilon=ng.epsilon,
                     is_gqre=bool(ng.epsilon <= tol and pure.is_gqre))
