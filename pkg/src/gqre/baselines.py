"""Baseline iterations sharing the smoothed Frank-Wolfe loop and gradient feed.

All four consume the same grad_fn interface as the smoothed solver; only the
update rule differs. Multiplicative-exponential steps are max-shifted before
exponentiating, so large gradients cannot overflow.
"""

from __future__ import annotations

import math

import numpy as np

from .solver import Schedule, Trajectory, _run_loop, epsilon_projection


def _mult_exp(pi, v):
    # normalize(pi * exp(v)), shift-invariant in v
    z = v - v.max()
    q = pi * np.exp(z)
    return q / q.sum()


class _HardFW:
    """Frank-Wolfe with the unsmoothed argmax vertex (ties: lowest index)."""

    def __call__(self, t, dists, grad_fn, gamma, eps):
        grads = grad_fn(dists)
        out = []
        for pi, g in zip(dists, grads):
            vertex = np.zeros_like(pi)
            vertex[int(np.argmax(g))] = 1.0
            s = epsilon_projection(vertex, eps)
            out.append(pi + gamma * (s - pi))
        return out


class _Extragradient:
    """Mirror-prox: an entropic probe step, then the real step from the probe's
    gradient; two gradient evaluations (two oracle batches) per iteration.

    A fixed schedule's gamma is taken as-is; under the diminishing schedule the
    mirror step follows the robust stochastic-approximation rule 1/sqrt(t)
    instead of the Frank-Wolfe convex-combination weight, which is meaningless
    for a multiplicative update.
    """

    def __init__(self, own_step: bool = False):
        self.own_step = own_step

    def __call__(self, t, dists, grad_fn, gamma, eps):
        step = 1.0 / math.sqrt(t) if self.own_step else gamma
        grads = grad_fn(dists)
        half = [epsilon_projection(_mult_exp(pi, step * g), eps)
                for pi, g in zip(dists, grads)]
        grads_half = grad_fn(half)
        return [epsilon_projection(_mult_exp(pi, step * g), eps)
                for pi, g in zip(dists, grads_half)]


class _OGD:
    """Optimistic ascent in log space: log pi += step*(2 g_t - g_{t-1}).

    Step selection mirrors _Extragradient: schedule gamma when fixed, 1/sqrt(t)
    under the diminishing schedule.
    """

    def __init__(self, own_step: bool = False):
        self.own_step = own_step
        self.prev = None

    def __call__(self, t, dists, grad_fn, gamma, eps):
        step = 1.0 / math.sqrt(t) if self.own_step else gamma
        grads = grad_fn(dists)
        if self.prev is None:
            self.prev = grads
        out = [epsilon_projection(_mult_exp(pi, step * (2.0 * g - gp)), eps)
               for pi, g, gp in zip(dists, grads, self.prev)]
        self.prev = grads
        return out


class _AdaptivePGD:
    """Exponentiated gradient with its own 1/sqrt(t) step, ignoring the
    schedule's gamma."""

    def __call__(self, t, dists, grad_fn, gamma, eps):
        grads = grad_fn(dists)
        step = 1.0 / math.sqrt(t)
        return [epsilon_projection(_mult_exp(pi, step * g), eps)
                for pi, g in zip(dists, grads)]


def run_hard_fw(game, regs, schedule: Schedule, T: int, **kwargs) -> Trajectory:
    return _run_loop(game, regs, schedule, T, _HardFW(), algorithm="hard_fw", **kwargs)


def run_extragradient(game, regs, schedule: Schedule, T: int, **kwargs) -> Trajectory:
    update = _Extragradient(own_step=schedule.mode == "theorem")
    return _run_loop(game, regs, schedule, T, update,
                     algorithm="extragradient", **kwargs)


def run_ogd(game, regs, schedule: Schedule, T: int, **kwargs) -> Trajectory:
    update = _OGD(own_step=schedule.mode == "theorem")
    return _run_loop(game, regs, schedule, T, update, algorithm="ogd", **kwargs)


def run_adaptive_pgd(game, regs, schedule: Schedule, T: int, **kwargs) -> Trajectory:
    return _run_loop(game, regs, schedule, T, _AdaptivePGD(),
                     algorithm="adaptive_pgd", **kwargs)
