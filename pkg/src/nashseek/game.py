"""N-person games with nonsmooth convex costs.

Costs are sums of terms from a small algebra (affine, quadratic, pairwise
quadratic, weighted absolute value, price coupling) so that kinks are known
structurally. Every term accepts a *profile* array of shape ``(..., N, n)``
whose row ``i`` holds the evaluating agent's own strategy and whose other rows
hold whatever the agent uses for its opponents (true strategies or its own
estimates). Leading batch dimensions broadcast.

Subgradients are resolved per term: smooth terms give their gradient and each
absolute-value kink contributes its own minimum-norm element, ``0`` exactly at
the kink. The half-width of the kink interval is reported separately so that
the distance from zero to the full subdifferential can be recovered.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .errors import DimensionMismatch, MonotonicityViolated, NonConvexDetected, NoConvergence

# ---------------------------------------------------------------------------
# term algebra


class Term:
    smooth = True

    def value(self, P: np.ndarray, i: int) -> np.ndarray:
        raise NotImplementedError

    def grad(self, P: np.ndarray, i: int) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


def _vec(v, n):
    a = np.asarray(v, dtype=float)
    return np.broadcast_to(a, (n,)).copy() if a.ndim <= 1 else a


@dataclass(frozen=True)
class Constant(Term):
    c: float

    def value(self, P, i):
        return np.full(P.shape[:-2], float(self.c))

    def grad(self, P, i):
        return np.zeros(P.shape[:-2] + P.shape[-1:])

    def to_dict(self):
        return {"type": "constant", "c": self.c}


@dataclass(frozen=True)
class Affine(Term):
    """``coef · x_i + offset``."""

    coef: Sequence[float] | float
    offset: float = 0.0

    def _coef(self, n):
        return _vec(self.coef, n)

    def value(self, P, i):
        return P[..., i, :] @ self._coef(P.shape[-1]) + self.offset

    def grad(self, P, i):
        return np.broadcast_to(self._coef(P.shape[-1]), P.shape[:-2] + P.shape[-1:]).copy()

    def to_dict(self):
        return {"type": "affine", "coef": np.asarray(self.coef).tolist(), "offset": self.offset}


@dataclass(frozen=True)
class Quadratic(Term):
    """``(x_i - center)ᵀ Q (x_i - center)``; a scalar ``Q`` means ``Q·I``."""

    Q: Sequence | float
    center: Sequence[float] | float = 0.0

    def _mats(self, n):
        Q = np.asarray(self.Q, dtype=float)
        Q = Q * np.eye(n) if Q.ndim == 0 else Q
        return Q, _vec(self.center, n)

    def value(self, P, i):
        Q, c = self._mats(P.shape[-1])
        d = P[..., i, :] - c
        return np.einsum("...k,kl,...l->...", d, Q, d)

    def grad(self, P, i):
        Q, c = self._mats(P.shape[-1])
        return (P[..., i, :] - c) @ (Q + Q.T).T

    def to_dict(self):
        return {"type": "quadratic", "Q": np.asarray(self.Q).tolist(), "center": np.asarray(self.center).tolist()}


@dataclass(frozen=True)
class PairwiseQuadratic(Term):
    """``weight · ||x_i - x_other - offset||²``."""

    other: int
    weight: float = 1.0
    offset: Sequence[float] | float = 0.0

    def value(self, P, i):
        d = P[..., i, :] - P[..., self.other, :] - _vec(self.offset, P.shape[-1])
        return self.weight * np.sum(d * d, axis=-1)

    def grad(self, P, i):
        if self.other == i:
            return np.zeros(P.shape[:-2] + P.shape[-1:])
        d = P[..., i, :] - P[..., self.other, :] - _vec(self.offset, P.shape[-1])
        return 2.0 * self.weight * d

    def to_dict(self):
        return {"type": "pairwise_quadratic", "other": self.other, "weight": self.weight,
                "offset": np.asarray(self.offset).tolist()}


@dataclass(frozen=True)
class PriceCoupling(Term):
    """Revenue term ``-(p - a·Σ_j φ(x_j)) · 1ᵀx_i``.

    ``aggregate="squares"`` uses ``φ(x_j) = ||x_j||²``; ``"linear"`` uses the
    classical ``φ(x_j) = 1ᵀx_j``. The sum runs over all agents, the evaluating
    agent included.
    """

    p: float
    a: float
    aggregate: str = "squares"

    def __post_init__(self):
        if self.aggregate not in ("squares", "linear"):
            raise ValueError(f"unknown aggregate {self.aggregate!r}")

    def _phi(self, P):
        if self.aggregate == "squares":
            return np.sum(P * P, axis=(-2, -1))
        return np.sum(P, axis=(-2, -1))

    def value(self, P, i):
        return -(self.p - self.a * self._phi(P)) * np.sum(P[..., i, :], axis=-1)

    def grad(self, P, i):
        xi = P[..., i, :]
        price = (self.p - self.a * self._phi(P))[..., None]
        own = np.sum(xi, axis=-1)[..., None]
        dphi = 2.0 * xi if self.aggregate == "squares" else np.ones_like(xi)
        return -price + self.a * own * dphi

    def to_dict(self):
        return {"type": "price_coupling", "p": self.p, "a": self.a, "aggregate": self.aggregate}


@dataclass(frozen=True)
class AbsKink(Term):
    """``weight · Σ_k |x_ik - center_k|`` (componentwise kinks)."""

    weight: Sequence[float] | float
    center: Sequence[float] | float = 0.0
    smooth = False

    def params(self, n):
        return _vec(self.weight, n), _vec(self.center, n)

    def value(self, P, i):
        w, c = self.params(P.shape[-1])
        return np.sum(w * np.abs(P[..., i, :] - c), axis=-1)

    def grad(self, P, i):
        return np.zeros(P.shape[:-2] + P.shape[-1:])

    def signs(self, P, i):
        _, c = self.params(P.shape[-1])
        return np.sign(P[..., i, :] - c)

    def to_dict(self):
        return {"type": "abs", "weight": np.asarray(self.weight).tolist(), "center": np.asarray(self.center).tolist()}


@dataclass(frozen=True)
class SmoothFunction(Term):
    """Arbitrary smooth closure ``fn(x_i, P) -> float``; gradient by central differences.

    Only meant for diagnostics: there is no kink handling and evaluation is
    not vectorized over batches.
    """

    fn: Callable
    h: float = 1e-6

    def value(self, P, i):
        P = np.asarray(P, dtype=float)
        flat = P.reshape((-1,) + P.shape[-2:])
        out = np.array([self.fn(p[i].copy(), p.copy()) for p in flat], dtype=float)
        return out.reshape(P.shape[:-2])

    def grad(self, P, i):
        P = np.asarray(P, dtype=float)
        n = P.shape[-1]
        g = np.zeros(P.shape[:-2] + (n,))
        for k in range(n):
            Pp, Pm = P.copy(), P.copy()
            Pp[..., i, k] += self.h
            Pm[..., i, k] -= self.h
            g[..., k] = (self.value(Pp, i) - self.value(Pm, i)) / (2 * self.h)
        return g

    def to_dict(self):
        raise TypeError("closure terms cannot be serialized")


TERM_TYPES = {
    "constant": lambda d: Constant(d["c"]),
    "affine": lambda d: Affine(d["coef"], d.get("offset", 0.0)),
    "quadratic": lambda d: Quadratic(d["Q"], d.get("center", 0.0)),
    "pairwise_quadratic": lambda d: PairwiseQuadratic(int(d["other"]), d.get("weight", 1.0), d.get("offset", 0.0)),
    "price_coupling": lambda d: PriceCoupling(d["p"], d["a"], d.get("aggregate", "squares")),
    "abs": lambda d: AbsKink(d["weight"], d.get("center", 0.0)),
}


def term_from_dict(d: dict) -> Term:
    try:
        return TERM_TYPES[d["type"]](d)
    except KeyError as exc:
        raise ValueError(f"bad term specification {d!r}: missing {exc}") from None


# ---------------------------------------------------------------------------
# game


@dataclass(frozen=True)
class GameSpec:
    n_agents: int
    dim: int
    costs: tuple
    check_convexity: bool = False

    def __post_init__(self):
        costs = tuple(tuple(c) for c in self.costs)
        if len(costs) != self.n_agents:
            raise DimensionMismatch(f"{len(costs)} cost functions for {self.n_agents} agents")
        for i, terms in enumerate(costs):
            for t in terms:
                if isinstance(t, PairwiseQuadratic) and not 0 <= t.other < self.n_agents:
                    raise DimensionMismatch(f"agent {i} couples to unknown agent {t.other}")
        object.__setattr__(self, "costs", costs)

    @property
    def size(self) -> int:
        return self.n_agents * self.dim

    def profile(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.size:
            raise DimensionMismatch(f"expected strategy vector of length {self.size}, got {x.shape[-1]}")
        return x.reshape(x.shape[:-1] + (self.n_agents, self.dim))

    def cost(self, i: int, P) -> np.ndarray:
        P = np.asarray(P, dtype=float)
        return sum((t.value(P, i) for t in self.costs[i]), np.zeros(P.shape[:-2]))

    def kinks(self, i: int):
        return [(k, t) for k, t in enumerate(self.costs[i]) if isinstance(t, AbsKink)]

    def kink_pattern(self, x) -> dict:
        """Sign of every kink argument at the true profile ``x`` (0 at the kink)."""
        P = self.profile(x)
        return {(i, k): t.signs(P, i) for i in range(self.n_agents) for k, t in self.kinks(i)}


def _selection(game: GameSpec, i: int, P: np.ndarray, pattern=None, include_kinks=True):
    n = game.dim
    sel = np.zeros(P.shape[:-2] + (n,))
    radius = np.zeros_like(sel)
    for k, t in enumerate(game.costs[i]):
        if isinstance(t, AbsKink):
            if not include_kinks:
                continue
            w, c = t.params(n)
            s = pattern[(i, k)] if pattern is not None else np.sign(P[..., i, :] - c)
            sel = sel + w * s
            radius = radius + np.where(P[..., i, :] == c, w, 0.0)
        else:
            sel = sel + t.grad(P, i)
    return sel, radius


@dataclass(frozen=True)
class SubdiffResult:
    selection: np.ndarray
    is_smooth_point: bool
    interval_radius: np.ndarray

    @property
    def distance_to_zero(self) -> float:
        """Euclidean distance from 0 to the box ``selection ± interval_radius``."""
        gap = np.maximum(np.abs(self.selection) - self.interval_radius, 0.0)
        return float(np.linalg.norm(gap))


def _convexity_probe(game, i, P, tol=1e-9):
    base = game.cost(i, P)
    for k in range(game.dim):
        for h in (1e-3, 1.0, 10.0):
            Pp, Pm = P.copy(), P.copy()
            Pp[i, k] += h
            Pm[i, k] -= h
            if base > 0.5 * (game.cost(i, Pp) + game.cost(i, Pm)) + tol * max(1.0, abs(base)):
                raise NonConvexDetected(f"J_{i + 1} fails midpoint convexity at x_i={P[i]}")


def subdiff(game: GameSpec, i: int, x_i, others) -> SubdiffResult:
    """Minimum-norm subgradient of ``J_i`` in ``x_i`` with ``others`` held fixed.

    ``others`` stacks the remaining ``N-1`` strategy blocks in agent order.
    """
    N, n = game.n_agents, game.dim
    x_i = np.asarray(x_i, dtype=float).reshape(n)
    others = np.asarray(others, dtype=float).reshape(-1)
    if others.size != (N - 1) * n:
        raise DimensionMismatch(f"expected {(N - 1) * n} opponent entries, got {others.size}")
    P = np.insert(others.reshape(N - 1, n), i, x_i, axis=0)
    if game.check_convexity:
        _convexity_probe(game, i, P)
    sel, rad = _selection(game, i, P)
    return SubdiffResult(sel, bool(np.all(rad == 0)), rad)


def pseudogradient(game: GameSpec, x, include_kinks: bool = True) -> np.ndarray:
    """Stack of minimum-norm selections against the true profile.

    Accepts leading batch dimensions on ``x``.
    """
    P = game.profile(x)
    cols = [_selection(game, i, P, include_kinks=include_kinks)[0] for i in range(game.n_agents)]
    return np.stack(cols, axis=-2).reshape(np.shape(x))


def augmented_map(game: GameSpec, bold_x, pattern=None) -> np.ndarray:
    """Each agent's selection evaluated against its own estimate vector.

    ``bold_x`` stacks the N estimate vectors (length N²n). ``pattern`` freezes
    kink signs (see :meth:`GameSpec.kink_pattern`).
    """
    N, n = game.n_agents, game.dim
    bold_x = np.asarray(bold_x, dtype=float)
    if bold_x.size != N * N * n:
        raise DimensionMismatch(f"expected {N * N * n} estimate entries, got {bold_x.size}")
    B = bold_x.reshape(N, N, n)
    out = np.empty((N, n))
    for i in range(N):
        out[i] = _selection(game, i, B[i], pattern=pattern)[0]
    return out.reshape(N * n)


def ne_residuals(game: GameSpec, x) -> np.ndarray:
    """Per-agent distance from 0 to the subdifferential at ``x``."""
    P = game.profile(x)
    res = np.empty(game.n_agents)
    for i in range(game.n_agents):
        sel, rad = _selection(game, i, P)
        res[i] = np.linalg.norm(np.maximum(np.abs(sel) - rad, 0.0))
    return res


def verify_ne(game: GameSpec, x, tol: float = 1e-6) -> tuple[bool, np.ndarray]:
    res = ne_residuals(game, x)
    return bool(np.all(res <= tol)), res


# ---------------------------------------------------------------------------
# regularity constants


@dataclass(frozen=True)
class RegularityConstants:
    theta: float
    w: float
    estimated: bool = False
    samples: int = 0

    def __post_init__(self):
        if not (self.theta > 0 and self.w > 0):
            raise ValueError("theta and w must be positive")
        if self.w > self.theta * (1 + 1e-12):
            raise ValueError(f"w={self.w} exceeds theta={self.theta}")

    def describe(self) -> str:
        kind = f"sampled estimate over {self.samples} pairs" if self.estimated else "supplied"
        return f"theta={self.theta:.4f} (lower bound), w={self.w:.4f} (upper bound) [{kind}]" if self.estimated \
            else f"theta={self.theta:.4f}, w={self.w:.4f} [{kind}]"


def _box_bounds(game, box):
    lo, hi = box
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (game.size,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (game.size,))
    if np.any(hi < lo):
        raise ValueError("empty box")
    return lo, hi


def sample_quotients(game: GameSpec, box, samples: int, seed: int, include_kinks: bool = False):
    """Lipschitz and monotonicity quotients of F over random pairs in ``box``."""
    if samples < 2:
        raise ValueError("need at least 2 samples")
    lo, hi = _box_bounds(game, box)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(lo, hi, size=(samples, 2, game.size))
    x, y = pts[:, 0], pts[:, 1]
    dF = pseudogradient(game, x, include_kinks) - pseudogradient(game, y, include_kinks)
    dx = x - y
    nx2 = np.sum(dx * dx, axis=1)
    keep = nx2 > 0
    lip = np.sqrt(np.sum(dF * dF, axis=1)[keep] / nx2[keep])
    mono = np.sum(dx * dF, axis=1)[keep] / nx2[keep]
    return lip, mono


def estimate_constants(game: GameSpec, box=(0.0, 50.0), samples: int = 10_000, seed: int = 42,
                       include_kinks: bool = False) -> RegularityConstants:
    """Empirical Lipschitz constant and strong-monotonicity modulus of F.

    ``theta`` is the largest sampled ratio ``||F(x)-F(x')|| / ||x-x'||`` and
    ``w`` the smallest ``(x-x')ᵀ(F(x)-F(x')) / ||x-x'||²``, so they are a lower
    and an upper bound on the true constants respectively.

    By default the absolute-value kink terms are left out. They are
    subdifferentials of convex functions of the agent's own strategy: they can
    only raise the monotonicity quotient, and across a kink the Lipschitz
    ratio is unbounded, so the estimate would just measure how close the
    sampler came to a kink. Pass ``include_kinks=True`` to sample the full
    selection anyway.

    Raises
    ------
    MonotonicityViolated
        If any sampled pair gives a negative monotonicity quotient.
    """
    lip, mono = sample_quotients(game, box, samples, seed, include_kinks)
    if np.any(mono < 0):
        raise MonotonicityViolated(f"negative monotonicity quotient {mono.min():.4g} on the sampled box")
    return RegularityConstants(theta=float(lip.max()), w=float(mono.min()), estimated=True, samples=samples)


def midpoint_convex(game: GameSpec, box, samples: int = 200, seed: int = 0, tol: float = 1e-9) -> bool:
    """Randomized check that each ``J_i`` is convex in ``x_i`` over ``box``."""
    lo, hi = _box_bounds(game, box)
    rng = np.random.default_rng(seed)
    N, n = game.n_agents, game.dim
    for _ in range(samples):
        P = game.profile(rng.uniform(lo, hi)).copy()
        a = game.profile(rng.uniform(lo, hi))
        b = game.profile(rng.uniform(lo, hi))
        for i in range(N):
            Pa, Pb, Pm = P.copy(), P.copy(), P.copy()
            Pa[i], Pb[i] = a[i], b[i]
            Pm[i] = 0.5 * (a[i] + b[i])
            if game.cost(i, Pm) > 0.5 * game.cost(i, Pa) + 0.5 * game.cost(i, Pb) + tol:
                return False
    return True


# ---------------------------------------------------------------------------
# NE oracles


def _prox_abs_sum(y: float, t: float, weights, centers) -> float:
    """argmin_z ½(z-y)² + t Σ_k w_k |z - c_k| for scalar ``z``."""
    if len(weights) == 0:
        return y
    order = np.argsort(centers)
    c = np.asarray(centers, dtype=float)[order]
    w = t * np.asarray(weights, dtype=float)[order]
    total = w.sum()
    # subgradient of the kink sum just left of c[m] is (sum of w below) - (sum at or above)
    below = np.concatenate(([0.0], np.cumsum(w)))
    for m in range(len(c)):
        lo = c[m] - y + below[m] - (total - below[m])
        hi = c[m] - y + below[m + 1] - (total - below[m + 1])
        if lo <= 0.0 <= hi:
            return float(c[m])
    for m in range(len(c) + 1):
        z = y - (below[m] - (total - below[m]))
        left = -np.inf if m == 0 else c[m - 1]
        right = np.inf if m == len(c) else c[m]
        if left < z < right:
            return float(z)
    raise RuntimeError("prox root not bracketed")  # unreachable for w >= 0


def _kink_prox(game: GameSpec, z: np.ndarray, t: float) -> np.ndarray:
    P = z.reshape(game.n_agents, game.dim).copy()
    for i in range(game.n_agents):
        kinks = [term.params(game.dim) for _, term in game.kinks(i)]
        if not kinks:
            continue
        for k in range(game.dim):
            P[i, k] = _prox_abs_sum(P[i, k], t, [w[k] for w, _ in kinks], [c[k] for _, c in kinks])
    return P.reshape(-1)


def solve_ne(game: GameSpec, x0, step: float = 0.1, tol: float = 1e-10, max_iter: int = 100_000) -> np.ndarray:
    """Forward-backward fixed-point iteration for the unique NE.

    Smooth terms take an explicit step ``x - step·F_smooth(x)``; the kink
    terms are handled exactly through their proximal map, so iterates land on
    kinks instead of chattering across them. Stops when every agent's
    distance from 0 to its subdifferential is at most ``tol``.

    Raises
    ------
    NoConvergence
        After ``max_iter`` iterations, or if the iterates stop being finite.
    """
    if step <= 0 or tol <= 0:
        raise ValueError("step and tol must be positive")
    x = np.asarray(x0, dtype=float).reshape(game.size).copy()
    for _ in range(max_iter):
        if np.max(ne_residuals(game, x)) <= tol:
            return x
        x = _kink_prox(game, x - step * pseudogradient(game, x, include_kinks=False), step)
        if not np.all(np.isfinite(x)):
            break
    if np.max(ne_residuals(game, x)) <= tol:
        return x
    raise NoConvergence(f"fixed-point iteration did not reach tol={tol:g} in {max_iter} iterations")


def best_response_ne(game: GameSpec, x0, tol: float = 1e-7, max_sweeps: int = 10_000) -> np.ndarray:
    """Gauss-Seidel best-response iteration using cost values only.

    Each agent in turn minimizes its own cost with the others fixed (Brent's
    method for scalar strategies, Powell otherwise). Independent of the
    subgradient machinery used elsewhere.
    """
    N, n = game.n_agents, game.dim
    P = game.profile(np.asarray(x0, dtype=float)).copy()
    for _ in range(max_sweeps):
        change = 0.0
        for i in range(N):
            def f(z, i=i):
                Q = P.copy()
                Q[i] = z
                return float(game.cost(i, Q))

            if n == 1:
                r = optimize.minimize_scalar(lambda s: f(np.array([s])), bracket=(P[i, 0] - 1.0, P[i, 0] + 1.0),
                                             method="brent", options={"xtol": 1e-12, "maxiter": 2000})
                new = np.array([r.x])
            else:
                r = optimize.minimize(f, P[i], method="Powell", options={"xtol": 1e-12, "ftol": 1e-15})
                new = np.asarray(r.x)
            change = max(change, float(np.max(np.abs(new - P[i]))))
            P[i] = new
        if change <= tol:
            return P.reshape(-1).copy()
    raise NoConvergence(f"best-response iteration did not settle to {tol:g} in {max_sweeps} sweeps")
