"""Generalized quantal response equilibria of finite normal-form games.

Compute them with a smoothed Frank-Wolfe iteration driven by exact or
simulated-play gradients, verify candidate profiles, and benchmark against
standard baselines. See the README for the command-line harness.
"""

from .baselines import run_adaptive_pgd, run_extragradient, run_hard_fw, run_ogd
from .games import (DominanceReport, Game, StrategyProfile, action_values,
                    check_diagonal_dominance, expected_utility, game_jacobian,
                    gen_matching_pennies, gen_rank_k, gen_strongly_monotone,
                    load_game, normalize_utilities, payoff_gradient, save_game)
from .metrics import (GapReport, equilibrium_report, nash_gap, smoothed_gap,
                      smoothed_gap_gradient, verify_gqre_pure)
from .oracle import (GradientEstimate, OracleReport, estimate_gradient,
                     estimate_gradients, simulate, theoretical_variance)
from .regularizers import (ConvergenceError, Regularizer, SingularityError,
                           qr_entropy, qr_hellinger, qr_numeric, qr_objective,
                           qr_renyi, qr_sqmean, qr_tv, quantal_response,
                           reg_gradient, reg_hessian, reg_value,
                           regularizer_list)
from .solver import (ALGORITHMS, RecordOptions, Schedule, Trajectory,
                     epsilon_projection, run_smoothed_fw, smoothed_direction,
                     theorem_schedule)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS", "ConvergenceError", "DominanceReport", "Game", "GapReport",
    "GradientEstimate", "OracleReport", "RecordOptions", "Regularizer",
    "Schedule", "SingularityError", "StrategyProfile", "Trajectory",
    "action_values", "check_diagonal_dominance", "epsilon_projection",
    "equilibrium_report", "estimate_gradient", "estimate_gradients",
    "expected_utility", "game_jacobian", "gen_matching_pennies", "gen_rank_k",
    "gen_strongly_monotone", "load_game", "nash_gap", "normalize_utilities",
    "payoff_gradient", "qr_entropy", "qr_hellinger", "qr_numeric",
    "qr_objective", "qr_renyi", "qr_sqmean", "qr_tv", "quantal_response",
    "reg_gradient", "reg_hessian", "reg_value", "regularizer_list",
    "run_adaptive_pgd", "run_extragradient", "run_hard_fw", "run_ogd",
    "run_smoothed_fw", "save_game", "simulate", "smoothed_direction",
    "smoothed_gap", "smoothed_gap_gradient", "theorem_schedule",
    "theoretical_variance", "verify_gqre_pure",
]
