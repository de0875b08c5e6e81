"""Independent reference implementations used only by the tests.

Everything here recomputes a quantity the library claims to compute, by a
different route: exhaustive enumeration, finite differences, linear programs,
or scalar root finding. Nothing imports from the library's numerics beyond
plain data types.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog


def brute_expected_utility(tensors, dists, player):
    """Sum over every joint action of prob * payoff."""
    counts = [len(d) for d in dists]
    total = 0.0
    for joint in itertools.product(*[range(c) for c in counts]):
        prob = 1.0
        for d, a in zip(dists, joint):
            prob *= d[a]
        total += prob * tensors[player][joint]
    return total


def brute_action_values(tensors, dists, player):
    """E[u_player | own action = a] for each a, by enumeration."""
    vals = np.zeros(len(dists[player]))
    for a in range(len(dists[player])):
        point = [np.array(d) for d in dists]
        e = np.zeros(len(dists[player]))
        e[a] = 1.0
        point[player] = e
        vals[a] = brute_expected_utility(tensors, point, player)
    return vals


def central_diff(fn, x, h=1e-6):
    """Componentwise central finite differences of a scalar function."""
    x = np.asarray(x, float)
    g = np.zeros_like(x)
    for i in range(x.size):
        up = x.copy(); up[i] += h
        dn = x.copy(); dn[i] -= h
        g[i] = (fn(up) - fn(dn)) / (2 * h)
    return g


def central_diff_jacobian(fn, x, h=1e-6):
    """Central differences of a vector-valued function; returns d fn / d x."""
    x = np.asarray(x, float)
    cols = []
    for i in range(x.size):
        up = x.copy(); up[i] += h
        dn = x.copy(); dn[i] -= h
        cols.append((np.asarray(fn(up)) - np.asarray(fn(dn))) / (2 * h))
    return np.stack(cols, axis=-1)


def tv_response_lp(lam, u, reference):
    """max_p lam*<p,u> - 0.5*||p - ref||_1 over the simplex, as an LP.

    Variables (p, t) with t >= p - ref and t >= ref - p; minimize
    -lam*u^T p + 0.5*1^T t.
    """
    u = np.asarray(u, float)
    ref = np.asarray(reference, float)
    n = u.size
    c = np.concatenate([-lam * u, 0.5 * np.ones(n)])
    ident = np.eye(n)
    A_ub = np.block([[ident, -ident], [-ident, -ident]])
    b_ub = np.concatenate([ref, -ref])
    A_eq = np.concatenate([np.ones(n), np.zeros(n)])[None, :]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * n + [(None, None)] * n,
                  method="highs")
    assert res.success, res.message
    return res.x[:n], -res.fun


def tv_objective_lp(lam, u, reference):
    _, best = tv_response_lp(lam, u, reference)
    return best


def sqmean_objective_oracle(lam, u, x, reference):
    """max_p lam*<p,u> - (x^T(p-ref))^2 via a 1-D reduction.

    For fixed m = x^T p the inner problem max lam*<p,u> s.t. x^T p = m is an
    LP whose value is concave in m; g(m) = V(m) - (m - b)^2 is maximized by
    ternary search over the feasible range of m.
    """
    u = np.asarray(u, float)
    x = np.asarray(x, float)
    ref = np.asarray(reference, float)
    n = u.size
    b = float(x @ ref)

    def inner(m):
        res = linprog(-lam * u, A_eq=np.stack([np.ones(n), x]),
                      b_eq=[1.0, m], bounds=[(0, None)] * n, method="highs")
        if not res.success:
            return -np.inf
        return -res.fun

    lo, hi = float(x.min()), float(x.max())
    for _ in range(200):
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if inner(m1) - (m1 - b) ** 2 < inner(m2) - (m2 - b) ** 2:
            lo = m1
        else:
            hi = m2
    m = 0.5 * (lo + hi)
    return inner(m) - (m - b) ** 2


def floor_projection_oracle(s, eps, tol=1e-13):
    """Euclidean projection onto {p >= eps, sum p = 1} by bisection on the
    shift nu in p = max(s + nu, eps), plus a KKT certificate."""
    s = np.asarray(s, float)
    n = s.size

    def mass(nu):
        return np.maximum(s + nu, eps).sum() - 1.0

    lo, hi = -s.max() + eps - 1.0, 1.0
    while mass(hi) < 0:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mass(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < tol:
            break
    p = np.maximum(s + 0.5 * (lo + hi), eps)
    p = p / p.sum() if abs(p.sum() - 1) > 1e-9 else p
    return p


def kkt_floor_projection_ok(s, eps, p, tol=1e-7):
    """Check p is the projection of s onto the eps-floored simplex: feasible,
    and s - p = nu*1 - mu with mu >= 0 supported on {p == eps}."""
    s = np.asarray(s, float)
    p = np.asarray(p, float)
    if abs(p.sum() - 1.0) > tol or (p < eps - tol).any():
        return False
    free = p > eps + tol
    if free.any():
        nu = np.mean(p[free] - s[free])
        resid = np.abs(p[free] - s[free] - nu).max()
        if resid > tol:
            return False
    else:
        nu = np.min(p - s)
    mu = p - s - nu  # must be >= 0 on the floored set, ~0 on the free set
    return bool((mu >= -tol).all())


def power_norm2(mat, iters=500, seed=0):
    """Spectral norm by power iteration on mat^T mat."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(mat.shape[1])
    v /= np.linalg.norm(v)
    for _ in range(iters):
        w = mat.T @ (mat @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
    return float(np.linalg.norm(mat @ v))


def grid_inner_max(pi, g, eta, steps=20001):
    """max over s in the 1-simplex segment of <s,g> - eta*KL(s||pi), for
    2-action players, by dense grid."""
    pi = np.asarray(pi, float)
    g = np.asarray(g, float)
    best = -np.inf
    for q in np.linspace(1e-9, 1 - 1e-9, steps):
        s = np.array([q, 1 - q])
        kl = float(np.sum(s * np.log(s / pi)))
        best = max(best, float(s @ g) - eta * kl)
    return best
