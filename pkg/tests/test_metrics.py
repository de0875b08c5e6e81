"""Gap measures: smoothed gap V, its analytic gradient, pure-direction
verification, and the quantal-response Nash gap."""

import numpy as np
import pytest

from gqre.games import (Game, StrategyProfile, action_values,
                        gen_matching_pennies, gen_strongly_monotone,
                        payoff_gradient)
from gqre.metrics import (equilibrium_report, nash_gap, smoothed_gap,
                          smoothed_gap_gradient, verify_gqre_pure)
from gqre.regularizers import qr_numeric, qr_objective, quantal_response, regularizer_list

from oracles import grid_inner_max

MP = gen_matching_pennies()
ENT1 = regularizer_list({"kind": "entropy", "lambda": 1.0}, 2)
UNIFORM = StrategyProfile.uniform([2, 2])


def random_profile(game: Game, rng, alpha: float = 1.0) -> StrategyProfile:
    return StrategyProfile([rng.dirichlet(np.ones(n) * alpha)
                            for n in game.action_counts])


def tangential(L: np.ndarray, counts) -> np.ndarray:
    """Project a stacked vector onto the product of simplex tangent spaces."""
    out, k = [], 0
    for n in counts:
        blk = L[k:k + n]
        out.append(blk - blk.mean())
        k += n
    return np.concatenate(out)


# -------------------------------------------------------------- smoothed gap

def test_smoothed_gap_zero_at_equilibrium():
    rep = smoothed_gap(MP, ENT1, UNIFORM, 1.0)
    assert rep.V == pytest.approx(0.0, abs=1e-12)
    assert all(v == pytest.approx(0.0, abs=1e-12) for v in rep.V_i)


def test_smoothed_gap_zero_for_constant_gradient_player():
    # lambda = 0 and pi at the reference: the perturbed gradient is constant
    regs = regularizer_list(
        [{"kind": "entropy", "lambda": 0.0, "reference": [0.3, 0.7]},
         {"kind": "entropy", "lambda": 0.0}], 2)
    prof = StrategyProfile([np.array([0.3, 0.7]), np.array([0.5, 0.5])])
    rep = smoothed_gap(MP, regs, prof, 1.0)
    assert rep.V == pytest.approx(0.0, abs=1e-12)


def test_smoothed_gap_matches_grid_oracle():
    prof = StrategyProfile([np.array([0.7, 0.3]), np.array([0.5, 0.5])])
    rep = smoothed_gap(MP, ENT1, prof, 1.0)
    assert rep.V > 0
    for i in range(2):
        g = payoff_gradient(MP, ENT1, prof, i)
        pi = prof.dists[i]
        oracle = grid_inner_max(pi, g, 1.0) - float(pi @ g)
        assert rep.V_i[i] == pytest.approx(max(oracle, 0.0), abs=1e-6)


def test_smoothed_gap_nonnegative_and_monotone_in_eta():
    rng = np.random.default_rng(8)
    games = [MP, gen_strongly_monotone(4, mu=1.0, skew=0.3, seed=2)]
    for game in games:
        regs = regularizer_list({"kind": "entropy", "lambda": 0.7}, 2)
        for _ in range(20):
            prof = random_profile(game, rng)
            vals = [smoothed_gap(game, regs, prof, eta).V for eta in (0.1, 1.0, 10.0)]
            assert all(v >= 0 for v in vals)
            assert vals[0] >= vals[1] - 1e-12 >= vals[2] - 2e-12


def test_smoothed_gap_rejects_bad_eta():
    with pytest.raises(ValueError):
        smoothed_gap(MP, ENT1, UNIFORM, 0.0)


# ----------------------------------------------------------------- gradient

def test_gap_gradient_tangentially_zero_at_equilibrium():
    L = smoothed_gap_gradient(MP, ENT1, UNIFORM, 1.0)
    assert np.linalg.norm(tangential(L, [2, 2])) <= 1e-8


def test_gap_gradient_matches_finite_differences():
    rng = np.random.default_rng(21)
    game = Game([3, 3], [rng.uniform(size=(3, 3)), rng.uniform(size=(3, 3))],
                metadata={"game_id": "random-3x3"})
    regs = regularizer_list({"kind": "entropy", "lambda": 0.8}, 2)
    h = 1e-5
    for _ in range(10):
        prof = random_profile(game, rng, alpha=5.0)
        if min(d.min() for d in prof.dists) < 0.05:
            continue
        L = smoothed_gap_gradient(game, regs, prof, 1.0)
        flat = np.concatenate(prof.dists)
        k = 0
        for i, n in enumerate(game.action_counts):
            for a in range(n - 1):
                d = np.zeros(flat.size)
                d[k + a], d[k + a + 1] = 1.0, -1.0  # simplex-tangent pair

                def v_at(x):
                    dists, j = [], 0
                    for m in game.action_counts:
                        dists.append(x[j:j + m])
                        j += m
                    return smoothed_gap(game, regs, StrategyProfile(dists), 1.0).V

                fd = (v_at(flat + h * d) - v_at(flat - h * d)) / (2 * h)
                an = float(L @ d)
                assert abs(fd - an) <= 1e-5 * max(1.0, abs(an))
            k += n


def test_gap_gradient_flattens_for_large_eta():
    prof = StrategyProfile([np.array([0.7, 0.3]), np.array([0.5, 0.5])])
    L = smoothed_gap_gradient(MP, ENT1, prof, 1e8)
    assert np.linalg.norm(tangential(L, [2, 2])) <= 1e-6


# ------------------------------------------------------------- verification

def test_pure_verification_accepts_equilibrium():
    rep = verify_gqre_pure(MP, ENT1, UNIFORM)
    assert rep.is_gqre is True
    assert max(rep.slack_i) <= 1e-10


def test_pure_verification_flags_dominated_action():
    dominated = Game(
        [2, 2], [np.array([[1.0, 1.0], [0.0, 0.0]]), np.full((2, 2), 0.5)],
        normalized=True, metadata={"game_id": "dominated"})
    regs = regularizer_list({"kind": "entropy", "lambda": 20.0}, 2)
    prof = StrategyProfile([np.array([0.001, 0.999]), np.array([0.5, 0.5])])
    rep = verify_gqre_pure(dominated, regs, prof)
    assert rep.is_gqre is False and rep.slack_i[0] > 0


def test_pure_slack_sign_agrees_with_numeric_best_response():
    rng = np.random.default_rng(30)
    game = gen_strongly_monotone(3, mu=1.0, skew=0.3, seed=9)
    regs = regularizer_list({"kind": "entropy", "lambda": 1.2}, 2)
    for _ in range(20):
        prof = random_profile(game, rng, alpha=4.0)
        # player 0 is replaced by its exact quantal response: no improvement
        w0 = action_values(game, prof, 0)
        dists = [quantal_response(regs[0], w0), prof.dists[1]]
        prof = StrategyProfile(dists)
        rep = verify_gqre_pure(game, regs, prof)
        for i in range(2):
            w = action_values(game, prof, i)
            x = qr_numeric(regs[i], w)
            gain = qr_objective(regs[i], w, x) - qr_objective(regs[i], w, prof.dists[i])
            assert (rep.slack_i[i] > 1e-7) == (gain > 1e-9)
        assert rep.slack_i[0] <= 1e-7


# ----------------------------------------------------------------- Nash gap

def test_nash_gap_zero_at_equilibrium():
    assert nash_gap(MP, ENT1, UNIFORM).epsilon <= 1e-8


def test_nash_gap_closed_form_and_grid():
    prof = StrategyProfile([np.array([0.9, 0.1]), np.array([0.5, 0.5])])
    rep = nash_gap(MP, ENT1, prof)
    w = action_values(MP, prof, 0)
    # entropy best value: log-partition over the reference
    best = float(np.log(np.sum(0.5 * np.exp(1.0 * w))))
    achieved = qr_objective(ENT1[0], w, prof.dists[0])
    assert rep.epsilon_i[0] == pytest.approx(best - achieved, abs=1e-12)
    # dense grid over the 1-simplex as an independent check
    qs = np.linspace(1e-9, 1 - 1e-9, 200001)
    p = np.stack([qs, 1 - qs], axis=1)
    vals = p @ w - np.sum(p * np.log(2 * p), axis=1)
    assert rep.epsilon_i[0] == pytest.approx(float(vals.max()) - achieved, abs=1e-6)


def test_nash_gap_zero_at_references_without_payoff_weight():
    regs = regularizer_list({"kind": "entropy", "lambda": 0.0}, 2)
    assert nash_gap(MP, regs, UNIFORM).epsilon <= 1e-12


def test_nash_gap_nonnegative_on_random_profiles():
    rng = np.random.default_rng(40)
    game = gen_strongly_monotone(4, mu=1.0, skew=0.3, seed=3)
    regs = regularizer_list({"kind": "squared_mean", "lambda": 1.5}, 2)
    for _ in range(25):
        rep = nash_gap(game, regs, random_profile(game, rng))
        assert rep.epsilon >= 0
        assert all(e >= 0 for e in rep.epsilon_i)


# ------------------------------------------------------------ merged report

def test_equilibrium_report_merges_all_measurements():
    rep = equilibrium_report(MP, ENT1, UNIFORM, eta=1.0, tol=1e-6)
    assert rep.is_gqre is True
    assert rep.V == pytest.approx(0.0, abs=1e-12)
    assert rep.epsilon <= 1e-8 and max(rep.slack_i) <= 1e-8
    off = StrategyProfile([np.array([0.8, 0.2]), np.array([0.4, 0.6])])
    rep = equilibrium_report(MP, ENT1, off, eta=1.0, tol=1e-6)
    assert rep.is_gqre is False and rep.V > 1e-4 and rep.epsilon > 1e-6


def test_equilibrium_report_survives_boundary_profiles():
    # entropy gradients are singular at point masses but the regret is not;
    # the report must still deliver a verdict there
    corner = StrategyProfile([np.array([1.0, 0.0]), np.array([1.0, 0.0])])
    rep = equilibrium_report(MP, ENT1, corner, eta=1.0, tol=1e-6)
    assert rep.is_gqre is False and rep.epsilon > 0.3
    assert rep.V is None and rep.slack_i is None


def test_pure_and_nash_tests_agree_on_random_profiles():
    rng = np.random.default_rng(50)
    for game in (MP, gen_strongly_monotone(4, mu=1.0, skew=0.3, seed=4)):
        regs = regularizer_list({"kind": "entropy", "lambda": 1.0}, 2)
        for _ in range(25):
            prof = random_profile(game, rng, alpha=3.0)
            pure = verify_gqre_pure(game, regs, prof, tol=1e-6)
            ng = nash_gap(game, regs, prof)
            assert pure.is_gqre == (ng.epsilon <= 1e-6)
