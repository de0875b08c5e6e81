"""Convex divergence penalties and their closed-form quantal responses.

A regularizer is a convex divergence f(p) from a reference distribution.
The quantal response to a utility vector u is

    argmax_{p in simplex}  lam * <p, u> - f(p)

which generalizes the logit response: the entropy penalty recovers softmax
and the other divergences give differently shaped (sometimes sparse)
responses. Each closed form below is the KKT solution of its divergence;
``qr_numeric`` is an independent mirror-ascent solver kept as a slow
cross-check and fallback.

Conventions:

* the reference distribution defaults to uniform,
* the total_variation / renyi / hellinger closed forms assume the uniform
  reference (qr_tv also accepts a general one),
* renyi needs alpha in (0, 1); alpha within 1e-6 of 1 is treated as the
  entropy penalty (the smooth limit),
* hellinger is the squared Hellinger distance 1 - sum(sqrt(p * ref)),
  the convex form whose response has the inverse-square shape below,
* squared_mean penalizes shifting the mean of fixed support points x:
  f(p) = (<x, p - ref>)^2.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from ._simplex import project_simplex

KINDS = ("entropy", "total_variation", "renyi", "hellinger", "squared_mean")
NONSMOOTH_KINDS = ("total_variation",)

# alpha this close to 1 dispatches renyi to the entropy response
RENYI_ENTROPY_TOL = 1e-6

_BISECT_TOL = 1e-12
_BISECT_MAX_ITERS = 200


class SingularityError(ValueError):
    """A gradient was requested where the penalty is not finitely differentiable."""


class ConvergenceError(RuntimeError):
    """An iterative solve did not reach its tolerance within its budget."""


@dataclass
class Regularizer:
    """One player's divergence penalty.

    kind            one of KINDS
    lam             rationality level multiplying the utility term (>= 0)
    alpha           renyi order, required for kind="renyi", in (0, 1]
    reference       reference distribution (default: uniform at point of use)
    support_points  strictly increasing grid for squared_mean (default: 1..n)
    """

    kind: str
    lam: float = 1.0
    alpha: float | None = None
    reference: np.ndarray | None = None
    support_points: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        self.lam = float(self.lam)
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lam must be finite and >= 0, got {self.lam}")
        if self.kind == "renyi":
            if self.alpha is None:
                raise ValueError("alpha is required for kind='renyi'")
            self.alpha = float(self.alpha)
            if not (0.0 < self.alpha <= 1.0 + RENYI_ENTROPY_TOL):
                raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        elif self.alpha is not None:
            raise ValueError(f"alpha is only meaningful for kind='renyi', not {self.kind!r}")
        if self.support_points is not None and self.kind != "squared_mean":
            raise ValueError("support_points is only meaningful for kind='squared_mean'")
        if self.reference is not None:
            ref = np.asarray(self.reference, dtype=float)
            if ref.ndim != 1 or ref.size == 0:
                raise ValueError("reference must be a non-empty 1-D distribution")
            if ref.min() <= 0:
                raise ValueError("reference must be strictly positive")
            if abs(ref.sum() - 1.0) > 1e-9:
                raise ValueError(f"reference must sum to 1, got {ref.sum()}")
            self.reference = ref
        if self.support_points is not None:
            pts = np.asarray(self.support_points, dtype=float)
            if pts.ndim != 1 or np.any(np.diff(pts) <= 0):
                raise ValueError("support_points must be 1-D and strictly increasing")
            self.support_points = pts

    @property
    def smooth(self) -> bool:
        return self.kind not in NONSMOOTH_KINDS

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "lambda": self.lam}
        if self.alpha is not None:
            d["alpha"] = self.alpha
        if self.reference is not None:
            d["reference"] = self.reference.tolist()
        if self.support_points is not None:
            d["support_points"] = self.support_points.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Regularizer":
        known = {"kind", "lambda", "alpha", "reference", "support_points"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown regularizer fields: {sorted(unknown)}")
        if "kind" not in d:
            raise ValueError("regularizer spec is missing 'kind'")
        return cls(
            kind=d["kind"],
            lam=d.get("lambda", 1.0),
            alpha=d.get("alpha"),
            reference=d.get("reference"),
            support_points=d.get("support_points"),
        )


def regularizer_list(spec, num_players: int) -> list[Regularizer]:
    """Expand a single spec (broadcast to every player) or a per-player list."""
    if isinstance(spec, Regularizer):
        return [spec] * num_players
    if isinstance(spec, dict):
        return [Regularizer.from_dict(spec)] * num_players
    items = list(spec)
    if len(items) != num_players:
        raise ValueError(f"expected {num_players} regularizers, got {len(items)}")
    return [r if isinstance(r, Regularizer) else Regularizer.from_dict(r) for r in items]


def _reference(reg: Regularizer, n: int) -> np.ndarray:
    if reg.reference is None:
        return np.full(n, 1.0 / n)
    if reg.reference.size != n:
        raise ValueError(f"reference has length {reg.reference.size}, expected {n}")
    return reg.reference


def _support_points(reg: Regularizer, n: int) -> np.ndarray:
    if reg.support_points is None:
        return np.arange(1, n + 1, dtype=float)
    if reg.support_points.size != n:
        raise ValueError(f"support_points has length {reg.support_points.size}, expected {n}")
    return reg.support_points


def _require_uniform(reg: Regularizer, n: int) -> None:
    if reg.reference is not None and not np.allclose(reg.reference, 1.0 / n, atol=1e-12):
        raise ValueError(f"kind={reg.kind!r} closed form requires the uniform reference")


def _renyi_as_entropy(reg: Regularizer) -> bool:
    return reg.kind == "renyi" and abs(reg.alpha - 1.0) <= RENYI_ENTROPY_TOL


def _check_point(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("p must be a non-empty 1-D array")
    if not np.all(np.isfinite(p)):
        raise ValueError("p contains non-finite entries")
    if p.min() < -1e-12:
        raise ValueError(f"p has a negative entry: {p.min()}")
    return np.maximum(p, 0.0)


def reg_value(reg: Regularizer, p) -> float:
    """Divergence f(p) from the reference. Zero iff p equals the reference."""
    p = _check_point(p)
    ref = _reference(reg, p.size)
    kind = "entropy" if _renyi_as_entropy(reg) else reg.kind
    if kind == "entropy":
        mask = p > 0
        return float(np.sum(p[mask] * np.log(p[mask] / ref[mask])))
    if kind == "total_variation":
        return float(0.5 * np.abs(p - ref).sum())
    if kind == "renyi":
        a = reg.alpha
        s = float(np.sum(p**a * ref ** (1.0 - a)))
        return float(np.log(s) / (a - 1.0))
    if kind == "hellinger":
        return float(1.0 - np.sqrt(p * ref).sum())
    # squared_mean
    x = _support_points(reg, p.size)
    return float((x @ (p - ref)) ** 2)


def reg_gradient(reg: Regularizer, p) -> np.ndarray:
    """Gradient of f at p (a subgradient for total_variation, sign(0) = 0).

    entropy / renyi / hellinger blow up on the boundary of the simplex and
    raise SingularityError there.
    """
    p = _check_point(p)
    ref = _reference(reg, p.size)
    kind = "entropy" if _renyi_as_entropy(reg) else reg.kind
    if kind in ("entropy", "renyi", "hellinger") and p.min() <= 0.0:
        raise SingularityError(
            f"{kind} gradient is singular at the simplex boundary (min p = {p.min()})"
        )
    if kind == "entropy":
        return np.log(p / ref) + 1.0
    if kind == "total_variation":
        return 0.5 * np.sign(p - ref)
    if kind == "renyi":
        a = reg.alpha
        w = p ** (a - 1.0) * ref ** (1.0 - a)
        s = float(np.sum(p * w))
        return (a / (a - 1.0)) * w / s
    if kind == "hellinger":
        return -0.5 * np.sqrt(ref / p)
    x = _support_points(reg, p.size)
    return 2.0 * float(x @ (p - ref)) * x


def reg_hessian(reg: Regularizer, p) -> np.ndarray:
    """Hessian of f at p; total_variation has zero curvature away from kinks."""
    p = _check_point(p)
    n = p.size
    ref = _reference(reg, n)
    kind = "entropy" if _renyi_as_entropy(reg) else reg.kind
    if kind in ("entropy", "renyi", "hellinger") and p.min() <= 0.0:
        raise SingularityError(
            f"{kind} Hessian is singular at the simplex boundary (min p = {p.min()})"
        )
    if kind == "entropy":
        return np.diag(1.0 / p)
    if kind == "total_variation":
        return np.zeros((n, n))
    if kind == "renyi":
        a = reg.alpha
        w = p ** (a - 1.0) * ref ** (1.0 - a)
        s = float(np.sum(p * w))
        diag = np.diag(a * p ** (a - 2.0) * ref ** (1.0 - a)) / s
        return diag + (a**2 / (1.0 - a)) * np.outer(w, w) / s**2
    if kind == "hellinger":
        return np.diag(0.25 * np.sqrt(ref) * p ** (-1.5))
    x = _support_points(reg, n)
    return 2.0 * np.outer(x, x)


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def qr_entropy(lam: float, u, reference=None) -> np.ndarray:
    """argmax lam*<p,u> - KL(p || ref): the logit response ref * exp(lam*u) / Z."""
    u = np.asarray(u, dtype=float)
    ref = np.full(u.size, 1.0 / u.size) if reference is None else np.asarray(reference, float)
    return _softmax(lam * u + np.log(ref))


def _capped_proportional(leftover: float, weights: np.ndarray, caps: np.ndarray) -> np.ndarray:
    """Split leftover mass proportionally to weights without exceeding caps."""
    x = np.zeros_like(caps)
    active = caps > 0
    remaining = leftover
    for _ in range(caps.size + 1):
        if remaining <= 1e-15 or not active.any():
            break
        w = np.where(active, weights, 0.0)
        share = remaining * w / w.sum()
        over = active & (x + share >= caps - 1e-15)
        if not over.any():
            x = x + share
            remaining = 0.0
            break
        remaining -= float((caps[over] - x[over]).sum())
        x[over] = caps[over]
        active &= ~over
    return x


def qr_tv(lam: float, u, reference=None) -> np.ndarray:
    """argmax lam*<p,u> - 0.5*||p - ref||_1 via exact KKT breakpoint enumeration.

    After rescaling by 2 the per-action objective (g_a - mu) p_a - |p_a - r_a|
    with g = 2*lam*u is piecewise linear, so each action's optimizer is
    0, r_a or 1 depending on where the multiplier mu sits relative to the
    breakpoints g_a -+ 1; mass exactly 1 pins mu down to one breakpoint or
    an interval. Ties at a breakpoint receive the leftover mass
    proportionally to the reference (capped), making the output
    deterministic even when the optimal face is flat. Exact zeros are
    possible, which is the point of this penalty.
    """
    u = np.asarray(u, dtype=float)
    n = u.size
    ref = np.full(n, 1.0 / n) if reference is None else np.asarray(reference, float)
    g = 2.0 * lam * u
    tol = 1e-12 * (1.0 + float(np.abs(g).max(initial=0.0)))
    candidates = np.unique(np.concatenate([g - 1.0, g + 1.0]))[::-1]
    for mu in candidates:
        tie_up = np.abs((g - 1.0) - mu) <= tol     # p_a in [r_a, 1]
        tie_dn = np.abs((g + 1.0) - mu) <= tol     # p_a in [0, r_a]
        full = ((g - 1.0) > mu) & ~tie_up          # p_a = 1
        zero = ((g + 1.0) < mu) & ~tie_dn          # p_a = 0
        mid = ~(full | zero | tie_up | tie_dn)     # p_a = r_a
        lo = np.where(full, 1.0, 0.0) + np.where(mid, ref, 0.0) + np.where(tie_up, ref, 0.0)
        width = np.where(tie_up, 1.0 - ref, 0.0) + np.where(tie_dn, ref, 0.0)
        lo_mass = float(lo.sum())
        hi_mass = lo_mass + float(width.sum())
        if lo_mass - 1.0 <= 1e-9 and 1.0 - hi_mass <= 1e-9:
            leftover = max(1.0 - lo_mass, 0.0)
            p = lo + _capped_proportional(leftover, ref, width)
            p = np.maximum(p, 0.0)
            s = p.sum()
            if abs(s - 1.0) > 1e-12:
                p = p / s
            return p
    raise ConvergenceError("no feasible total-variation multiplier found")  # pragma: no cover


def _grow_bracket(fn, base: float, want_positive: bool):
    """Find an offset where fn changes sign, doubling geometrically from base + 1."""
    off = 1.0
    for _ in range(400):
        val = fn(base + off)
        if (val > 0) == want_positive:
            return base + off
        off *= 2.0
    raise ConvergenceError("bracket growth failed to find a sign change")  # pragma: no cover


def _bisect(fn, lo: float, hi: float) -> float:
    """Bisection for fn increasing-in-sign from lo (fn<0) to hi (fn>0)."""
    for _ in range(_BISECT_MAX_ITERS):
        mid = 0.5 * (lo + hi)
        if hi - lo <= _BISECT_TOL * (1.0 + abs(mid)):
            break
        if fn(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def qr_renyi(lam: float, alpha: float, u) -> np.ndarray:
    """argmax lam*<p,u> - renyi_alpha(p || uniform) for alpha in (0, 1).

    The stationarity conditions give p_a proportional to
    (mu - lam*u_a)^(-1/(1-alpha)) where mu > lam*max(u) is the root of

        sum_a (mu - lam*u_a)^(-alpha/(1-alpha))
        ----------------------------------------  =  alpha / (1 - alpha).
        sum_a (mu - lam*u_a)^(-1/(1-alpha))

    The left side grows from 0 to infinity on (lam*max(u), inf), so a
    bisection bracket is grown geometrically and the root resolved to 1e-12.
    All powers are evaluated in log space, which keeps alpha near the ends
    of (0, 1) stable.
    """
    u = np.asarray(u, dtype=float)
    if abs(alpha - 1.0) <= RENYI_ENTROPY_TOL:
        return qr_entropy(lam, u)
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    r2 = 1.0 / (1.0 - alpha)
    r1 = alpha * r2
    base = float(lam * u.max())

    def _lse(z):
        m = z.max()
        return m + np.log(np.exp(z - m).sum())

    def ratio_gap(mu):
        ell = np.log(mu - lam * u)
        return np.exp(_lse(-r1 * ell) - _lse(-r2 * ell)) - r1

    lo = base + 1e-14 * (1.0 + abs(base))
    while ratio_gap(lo) >= 0:  # pathological shrink, should not trigger
        lo = base + (lo - base) * 1e-2
        if lo <= base:
            raise ConvergenceError("could not bracket the renyi multiplier from below")
    hi = _grow_bracket(ratio_gap, base, want_positive=True)
    mu = _bisect(ratio_gap, lo, hi)
    return _softmax(-r2 * np.log(mu - lam * u))


def qr_hellinger(lam: float, u) -> np.ndarray:
    """argmax lam*<p,u> - (1 - sum sqrt(p/n)): p_a = 1 / (4n (mu - lam*u_a)^2).

    mu > lam*max(u) is the root of sum_a (mu - lam*u_a)^(-2) = 4n, found by
    the same grown-bracket bisection as qr_renyi; the left side decreases
    from infinity to 0 so the sign convention is flipped.
    """
    u = np.asarray(u, dtype=float)
    n = u.size
    base = float(lam * u.max())

    def mass_gap(mu):
        with np.errstate(divide="ignore"):
            return 4.0 * n - float(np.sum((mu - lam * u) ** -2.0))

    lo = base + 1e-14 * (1.0 + abs(base))
    hi = _grow_bracket(mass_gap, base, want_positive=True)
    mu = _bisect(mass_gap, lo, hi)
    p = 1.0 / (4.0 * n * (mu - lam * u) ** 2)
    return p / p.sum()


def qr_sqmean(lam: float, u, reference=None, support_points=None) -> np.ndarray:
    """argmax lam*<p,u> - (<x, p - ref>)^2 by projected gradient on the simplex.

    Equivalent QP: minimize p'Qp + c'p with Q = x x', c = -lam*u - 2(x'ref)x.
    Step size 1/(2||x||^2 + 1) (below 1/L for the rank-one Hessian); stops
    when the gradient mapping falls to 1e-10 or raises ConvergenceError
    after 1e5 iterations.
    """
    u = np.asarray(u, dtype=float)
    n = u.size
    ref = np.full(n, 1.0 / n) if reference is None else np.asarray(reference, float)
    x = np.arange(1, n + 1, dtype=float) if support_points is None else np.asarray(support_points, float)
    b = float(x @ ref)
    step = 1.0 / (2.0 * float(x @ x) + 1.0)
    p = ref.copy()
    max_iters = 100000
    for _ in range(max_iters):
        grad = 2.0 * (float(x @ p) - b) * x - lam * u
        nxt = project_simplex(p - step * grad)
        gap = float(np.linalg.norm(p - nxt)) / step
        p = nxt
        if gap <= 1e-10:
            return p
    raise ConvergenceError(
        f"squared_mean response did not converge in {max_iters} iterations "
        f"(last gradient mapping {gap:.3e})"
    )


def quantal_response(reg: Regularizer, u) -> np.ndarray:
    """Dispatch to the closed-form response for reg.kind."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size == 0:
        raise ValueError("u must be a non-empty 1-D array")
    if not np.all(np.isfinite(u)):
        raise ValueError("u contains non-finite entries")
    n = u.size
    if reg.kind == "entropy":
        return qr_entropy(reg.lam, u, _reference(reg, n))
    if reg.kind == "total_variation":
        return qr_tv(reg.lam, u, _reference(reg, n))
    if reg.kind == "renyi":
        _require_uniform(reg, n)
        if _renyi_as_entropy(reg):
            return qr_entropy(reg.lam, u)
        return qr_renyi(reg.lam, reg.alpha, u)
    if reg.kind == "hellinger":
        _require_uniform(reg, n)
        return qr_hellinger(reg.lam, u)
    return qr_sqmean(reg.lam, u, _reference(reg, n), _support_points(reg, n))


def qr_objective(reg: Regularizer, u, p) -> float:
    """The maximized quantity lam*<p,u> - f(p)."""
    u = np.asarray(u, dtype=float)
    p = np.asarray(p, dtype=float)
    return reg.lam * float(p @ u) - reg_value(reg, p)


def qr_numeric(reg: Regularizer, u, tol: float = 1e-8, max_iters: int = 50000) -> np.ndarray:
    """Entropic mirror ascent on lam*<p,u> - f(p); slow independent oracle.

    Smooth kinds stop when the best pure-direction improvement
    max_a g_a - <p, g> of the ascent gradient g drops to tol (a valid
    optimality certificate for concave objectives). The nonsmooth
    total_variation case instead runs restarted subgradient rounds with a
    geometrically shrinking step, keeping the best iterate seen; the final
    step scale bounds how far its objective can sit from the maximum.
    """
    u = np.asarray(u, dtype=float)
    n = u.size
    ref = _reference(reg, n)
    if reg.kind == "total_variation":
        return _numeric_tv(reg, u, ref, max_iters)
    p = ref.copy()
    obj = qr_objective(reg, u, p)
    step = 1.0
    gap = np.inf
    for _ in range(max_iters):
        g = reg.lam * u - reg_gradient(reg, p)
        gap = float(g.max() - p @ g)
        if gap <= tol:
            return p
        q = p * np.exp(step * (g - g.max()))
        q /= q.sum()
        new_obj = qr_objective(reg, u, q)
        if new_obj < obj - 1e-15 * (1.0 + abs(obj)):
            step *= 0.5
            continue
        p, obj = q, new_obj
        step = min(step * 1.05, 16.0)
    raise ConvergenceError(f"qr_numeric stalled with gap {gap:.3e} > tol {tol:.1e}")


def _numeric_tv(reg: Regularizer, u, ref, max_iters: int) -> np.ndarray:
    best = ref.copy()
    best_obj = qr_objective(reg, u, best)
    p = ref.copy()
    step = 0.5
    rounds, inner = 70, max(200, min(1000, max_iters // 70))
    for _ in range(rounds):
        for _ in range(inner):
            g = reg.lam * u - reg_gradient(reg, p)
            p = p * np.exp(step * (g - g.max()))
            p /= p.sum()
            obj = qr_objective(reg, u, p)
            if obj > best_obj:
                best, best_obj = p.copy(), obj
        step *= 0.7
        p = best.copy()
    return best
