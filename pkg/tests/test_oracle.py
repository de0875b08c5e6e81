"""Simulated game-play oracle: sampling, unbiased gradient estimates, and the
variance law, all checked against fixed-seed Monte Carlo."""

import numpy as np
import pytest

from gqre.games import StrategyProfile, gen_matching_pennies, normalize_utilities, Game
from gqre.oracle import (OracleReport, estimate_gradient, estimate_gradients,
                         simulate, theoretical_variance)
from gqre.regularizers import SingularityError, reg_gradient, regularizer_list
from gqre.games import action_values

from oracles import brute_action_values


def small_game(rng, counts=(3, 3)):
    tensors = [rng.random(tuple(counts)) for _ in counts]
    return normalize_utilities(Game(list(counts), tensors, normalized=False))


# ---------------------------------------------------------------- sampling

def test_simulate_counts_conserved_and_deterministic():
    g = gen_matching_pennies()
    prof = StrategyProfile([np.array([0.7, 0.3]), np.array([0.4, 0.6])])
    r1 = simulate(g, prof, 500, np.random.default_rng(0))
    r2 = simulate(g, prof, 500, np.random.default_rng(0))
    for i in range(2):
        assert r1.counts[i].sum() == 500
        assert np.array_equal(r1.counts[i], r2.counts[i])
        assert np.array_equal(r1.cum_payoffs[i], r2.cum_payoffs[i])
    assert r1.num_plays == 500


def test_simulate_point_mass_profile():
    rng = np.random.default_rng(1)
    g = small_game(rng)
    prof = StrategyProfile([np.array([0.0, 1.0, 0.0]), np.array([1.0, 0.0, 0.0])])
    rep = simulate(g, prof, 50, rng)
    assert rep.counts[0][1] == 50 and rep.counts[1][0] == 50
    assert rep.cum_payoffs[0][1] == pytest.approx(50 * g.utilities[0][1, 0])
    assert rep.cum_payoffs[1][0] == pytest.approx(50 * g.utilities[1][1, 0])


def test_simulate_single_play():
    g = gen_matching_pennies()
    prof = StrategyProfile.uniform([2, 2])
    rep = simulate(g, prof, 1, np.random.default_rng(3))
    for i in range(2):
        assert rep.counts[i].sum() == 1
        assert int((rep.counts[i] != 0).sum()) == 1


def test_simulate_payoff_bounds_and_zero_convention():
    rng = np.random.default_rng(4)
    g = small_game(rng)
    prof = StrategyProfile([np.array([0.98, 0.01, 0.01]), np.array([1 / 3] * 3)])
    rep = simulate(g, prof, 200, rng)
    for i in range(2):
        zero = rep.counts[i] == 0
        assert np.all(rep.cum_payoffs[i][zero] == 0.0)
        assert np.all(rep.cum_payoffs[i] <= rep.counts[i] + 1e-12)
        assert np.all(rep.cum_payoffs[i] >= 0.0)


def test_simulate_mean_payoff_unbiased():
    # E[U_i(a)/M] = pi_i(a) * u_i(a, pi_{-i}); fixed seed, 3 sigma
    rng = np.random.default_rng(5)
    g = small_game(rng)
    prof = StrategyProfile([np.array([0.5, 0.3, 0.2]), np.array([0.25, 0.25, 0.5])])
    M, R = 50, 2000
    acc = np.zeros(3)
    for _ in range(R):
        acc += simulate(g, prof, M, rng).cum_payoffs[0] / M
    mean = acc / R
    vals = brute_action_values(g.utilities, prof.dists, 0)
    want = prof.dists[0] * vals
    # per-play variance of U contributions is at most 1/4 (payoffs in [0,1])
    se = 0.5 / np.sqrt(R * M)
    assert np.all(np.abs(mean - want) <= 3 * se + 1e-12)


# ---------------------------------------------------------------- estimates

def test_estimate_gradient_formula_by_hand():
    g = gen_matching_pennies()
    prof = StrategyProfile([np.array([0.25, 0.75]), np.array([0.5, 0.5])])
    regs = regularizer_list({"kind": "entropy", "lambda": 2.0}, 2)
    rep = OracleReport(counts=[np.array([3, 7]), np.array([4, 6])],
                       cum_payoffs=[np.array([1.5, 3.0]), np.array([2.0, 1.0])],
                       num_plays=10, profile=prof)
    est = estimate_gradient(rep, regs, 0)
    want_raw = 2.0 * np.array([1.5, 3.0]) / (10 * prof.dists[0])
    assert np.allclose(est.raw, want_raw)
    assert np.allclose(est.estimate, want_raw - reg_gradient(regs[0], prof.dists[0]))
    assert est.player == 0


def test_estimate_gradient_lambda_zero():
    g = gen_matching_pennies()
    prof = StrategyProfile.uniform([2, 2])
    regs = regularizer_list({"kind": "entropy", "lambda": 0.0}, 2)
    rep = simulate(g, prof, 20, np.random.default_rng(7))
    est = estimate_gradient(rep, regs, 0)
    assert np.array_equal(est.raw, np.zeros(2))
    assert np.allclose(est.estimate, -reg_gradient(regs[0], prof.dists[0]))


def test_estimate_gradient_unbiased_against_exact():
    rng = np.random.default_rng(8)
    g = small_game(rng)
    prof = StrategyProfile([np.array([0.6, 0.2, 0.2]), np.array([0.3, 0.3, 0.4])])
    regs = regularizer_list({"kind": "entropy", "lambda": 1.0}, 2)
    rep = simulate(g, prof, 10**6, rng)
    est = estimate_gradient(rep, regs, 0)
    exact = action_values(g, prof, 0)
    assert np.max(np.abs(est.raw - exact)) < 1e-2


def test_estimate_gradient_zero_probability_errors():
    g = gen_matching_pennies()
    prof = StrategyProfile([np.array([1.0, 0.0]), np.array([0.5, 0.5])])
    regs = regularizer_list({"kind": "squared_mean", "lambda": 1.0}, 2)
    rep = simulate(g, prof, 10, np.random.default_rng(9))
    with pytest.raises(SingularityError):
        estimate_gradient(rep, regs, 0)


def test_estimate_gradients_all_players():
    rng = np.random.default_rng(10)
    g = small_game(rng)
    prof = StrategyProfile.uniform([3, 3])
    regs = regularizer_list({"kind": "entropy", "lambda": 1.0}, 2)
    rep = simulate(g, prof, 100, rng)
    grads = estimate_gradients(rep, regs)
    assert len(grads) == 2
    for i, gvec in enumerate(grads):
        assert np.allclose(gvec, estimate_gradient(rep, regs, i).estimate)


# ----------------------------------------------------------------- variance

def test_theoretical_variance_frozen_matching_pennies():
    # at uniform: Var(F_hat_1(a)) = (E[u^2] - pi_a E[u]^2) / (M pi_a)
    #           = (0.5 - 0.5*0.25) / (100*0.5) = 0.0075
    g = gen_matching_pennies()
    prof = StrategyProfile.uniform([2, 2])
    v = theoretical_variance(g, prof, 0, 0, 1.0, 100)
    assert v == pytest.approx(0.0075, abs=1e-15)


def test_theoretical_variance_trivial_zeros():
    g = gen_matching_pennies()
    point = StrategyProfile([np.array([1.0, 0.0]), np.array([0.0, 1.0])])
    assert theoretical_variance(g, point, 0, 0, 1.0, 10) == pytest.approx(0.0)
    prof = StrategyProfile.uniform([2, 2])
    assert theoretical_variance(g, prof, 0, 0, 0.0, 10) == 0.0


def test_theoretical_variance_scales_inverse_M():
    rng = np.random.default_rng(11)
    g = small_game(rng)
    prof = StrategyProfile([np.array([0.5, 0.25, 0.25]), np.array([0.2, 0.5, 0.3])])
    v1 = theoretical_variance(g, prof, 1, 2, 1.3, 10)
    v2 = theoretical_variance(g, prof, 1, 2, 1.3, 40)
    assert v1 == pytest.approx(4 * v2, rel=1e-12)


def test_empirical_variance_matches_formula():
    rng = np.random.default_rng(12)
    g = gen_matching_pennies()
    prof = StrategyProfile([np.array([0.6, 0.4]), np.array([0.3, 0.7])])
    lam, M, R = 1.0, 5, 10000
    raws = np.empty((R, 2))
    for r in range(R):
        rep = simulate(g, prof, M, rng)
        raws[r] = lam * rep.cum_payoffs[0] / (M * prof.dists[0])
    for a in range(2):
        want = theoretical_variance(g, prof, 0, a, lam, M)
        got = raws[:, a].var(ddof=1)
        assert got == pytest.approx(want, rel=0.05)


def test_cross_player_estimates_are_dependent():
    # one batch of plays feeds every player's table, so F_hat_1(h) and
    # F_hat_2(h) covary; on matching pennies at uniform the per-play
    # covariance is -1/4, i.e. -1/(4M) per report
    g = gen_matching_pennies()
    prof = StrategyProfile.uniform([2, 2])
    rng = np.random.default_rng(13)
    M, R = 16, 20000
    xs = np.empty((R, 2))
    for r in range(R):
        rep = simulate(g, prof, M, rng)
        xs[r, 0] = rep.cum_payoffs[0][0] / (M * 0.5)
        xs[r, 1] = rep.cum_payoffs[1][0] / (M * 0.5)
    cov = np.cov(xs[:, 0], xs[:, 1], ddof=1)[0, 1]
    v1 = theoretical_variance(g, prof, 0, 0, 1.0, M)
    v2 = theoretical_variance(g, prof, 1, 0, 1.0, M)
    se_null = np.sqrt(v1 * v2 / R)
    assert abs(cov) > 3 * se_null
    assert cov == pytest.approx(-0.25 / M, abs=3 * se_null)
