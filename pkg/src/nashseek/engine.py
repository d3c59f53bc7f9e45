"""Fixed-step integration of the closed-loop seeking dynamics.

Each agent runs

    ẋ_i = v_i
    v̇_i = -k v_i - ∂J_i(x_i, 𝒙ⁱ₋ᵢ) - (α/k) R_i Σ_j a_ij (x̂ⁱ - x̂ʲ)
    𝒙̇ⁱ₋ᵢ = -α S_i Σ_j a_ij (x̂ⁱ - x̂ʲ)

where x̂ⁱ is the last broadcast copy of agent i's estimate vector (equal to
𝒙ⁱ itself under continuous communication). Agent i's estimate of its own
strategy is never stored separately: the estimate stack keeps a placeholder
on the diagonal and every read goes through :func:`assemble`, which writes
``x`` there.

Within a step the broadcast copies and the kink sign pattern are frozen;
broadcast refreshes apply together at the step boundary.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import conditions
from .conditions import RuleParams
from .errors import ConfigError, NumericalBlowup, TriggerInvariantError
from .game import GameSpec, RegularityConstants, augmented_map
from .graph import Graph, constants as graph_constants, laplacian
from .scheduler import CommScheme, TriggerConstants, TriggerState, Variant, eta_rates, poll, trigger_lhs_rhs_all


BLOWUP = 1e12


@dataclass
class WorldState:
    t: float
    x: np.ndarray        # (N, n)
    v: np.ndarray        # (N, n)
    est: np.ndarray      # (N, N, n); diagonal blocks are placeholders
    hat_x: np.ndarray    # (N, N, n)
    eta: np.ndarray | None = None

    @property
    def bold_x(self) -> np.ndarray:
        return assemble(self.x, self.est)

    def copy(self) -> "WorldState":
        return WorldState(self.t, self.x.copy(), self.v.copy(), self.est.copy(), self.hat_x.copy(),
                          None if self.eta is None else self.eta.copy())


def assemble(x: np.ndarray, est: np.ndarray) -> np.ndarray:
    """Estimate stack with each agent's own block set to its strategy."""
    B = est.copy()
    idx = np.arange(x.shape[0])
    B[idx, idx] = x
    return B


@dataclass(frozen=True)
class SimConfig:
    dt: float
    t_end: float
    params: RuleParams
    scheme: CommScheme
    record_stride: int = 1
    integrator: str = "rk4"

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.t_end < 0:
            raise ConfigError("t_end must be nonnegative")
        if self.record_stride < 1:
            raise ConfigError("record_stride must be a positive integer")
        if self.integrator not in ("rk4", "euler"):
            raise ConfigError(f"unknown integrator {self.integrator!r}")
        if self.scheme.variant is Variant.PERIODIC:
            self.scheme.period_steps(self.dt)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


def initial_state(game: GameSpec, x0, v0=None, estimates=None, scheme: CommScheme | None = None) -> WorldState:
    """Build the t=0 state.

    By default every agent starts out believing the others' true initial
    strategies, ``v(0) = 0`` and all agents broadcast at ``t = 0``.
    """
    N, n = game.n_agents, game.dim
    x = np.asarray(x0, dtype=float).reshape(N, n).copy()
    v = np.zeros((N, n)) if v0 is None else np.asarray(v0, dtype=float).reshape(N, n).copy()
    if estimates is None or (isinstance(estimates, str) and estimates == "broadcast-own"):
        est = np.broadcast_to(x, (N, N, n)).copy()
    else:
        est = np.asarray(estimates, dtype=float).reshape(N, N, n).copy()
    B = assemble(x, est)
    eta = None
    if scheme is not None and scheme.variant is Variant.EVENT:
        eta = scheme.initial_eta(N)
    return WorldState(0.0, x, v, B.copy(), B.copy(), eta)


class _Model:
    """Right-hand side bound to a game, graph and gains."""

    def __init__(self, game: GameSpec, graph: Graph, params: RuleParams, scheme: CommScheme):
        if graph.n_agents != game.n_agents:
            raise ConfigError(f"graph has {graph.n_agents} nodes but the game has {game.n_agents} agents")
        self.game, self.graph, self.params, self.scheme = game, graph, params, scheme
        self.L = laplacian(graph)
        self.N, self.n = game.n_agents, game.dim
        self.idx = np.arange(self.N)
        self.tc = None
        if scheme.variant is Variant.EVENT:
            gc = graph_constants(graph, game.dim)
            b1, b2 = conditions.trigger_gains(params, gc)
            self.tc = TriggerConstants(graph.weights, b1, b2, scheme.b, scheme.rho)

    def derivatives(self, x, v, est, hat, eta, pattern):
        k, alpha = self.params.k, self.params.alpha
        B = assemble(x, est)
        H = B if self.scheme.variant is Variant.CONTINUOUS else hat
        C = np.einsum("ij,jkl->ikl", self.L, H)
        F = augmented_map(self.game, B.reshape(-1), pattern).reshape(self.N, self.n)
        dv = -k * v - F - (alpha / k) * C[self.idx, self.idx]
        dest = -alpha * C
        dest[self.idx, self.idx] = 0.0
        deta = eta_rates(B, hat, eta, self.tc) if eta is not None else None
        return v.copy(), dv, dest, deta


def rhs(world: WorldState, game: GameSpec, graph: Graph, params: RuleParams, scheme: CommScheme):
    """Time derivatives at ``world``.

    Returns ``(dx, dv, d_est, d_eta)`` with ``dx, dv`` of length Nn, ``d_est``
    covering only the non-self estimate blocks (length N(N-1)n, agent-major)
    and ``d_eta`` of length N (``None`` unless event-triggered).
    """
    m = _Model(game, graph, params, scheme)
    pattern = game.kink_pattern(world.x.reshape(-1))
    dx, dv, dest, deta = m.derivatives(world.x, world.v, world.est, world.hat_x, world.eta, pattern)
    off = ~np.eye(m.N, dtype=bool)
    return dx.reshape(-1), dv.reshape(-1), dest[off].reshape(-1), deta


KINK_BISECTIONS = 30
MAX_KINK_SPLITS = 8


def _axpy(y, h, d):
    return tuple(None if a is None else a + h * b for a, b in zip(y, d))


def _rk4(f, y, h):
    k1 = f(*y)
    k2 = f(*_axpy(y, h / 2, k1))
    k3 = f(*_axpy(y, h / 2, k2))
    k4 = f(*_axpy(y, h, k3))
    new = tuple(None if a is None else a + h / 6 * (b1 + 2 * b2 + 2 * b3 + b4)
                for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))
    return new, k1


def _advance(m: _Model, s: WorldState, dt: float, integrator: str):
    """One step of length ``dt`` with broadcast copies held fixed.

    The kink sign pattern is frozen within each RK4 stage sequence. When a
    step would carry some strategy across a kink, the crossing is located by
    bisection and the step is split there, so no sub-step integrates with a
    stale sign.
    """
    game = m.game

    def field_for(pattern):
        return lambda x, v, e, eta: m.derivatives(x, v, e, s.hat_x, eta, pattern)  # noqa: E731

    y = (s.x, s.v, s.est, s.eta)
    pattern = game.kink_pattern(s.x.reshape(-1))
    if integrator == "euler":
        k1 = field_for(pattern)(*y)
        return _axpy(y, dt, k1), k1

    first_k1 = None
    remaining = dt
    for _ in range(MAX_KINK_SPLITS):
        f = field_for(pattern)
        new, k1 = _rk4(f, y, remaining)
        if first_k1 is None:
            first_k1 = k1
        if not pattern or game.kink_pattern(new[0].reshape(-1)) == pattern:
            return new, first_k1
        lo, hi = 0.0, remaining
        for _ in range(KINK_BISECTIONS):
            mid = 0.5 * (lo + hi)
            if game.kink_pattern(_rk4(f, y, mid)[0][0].reshape(-1)) == pattern:
                lo = mid
            else:
                hi = mid
        y, _ = _rk4(f, y, hi)
        pattern = game.kink_pattern(y[0].reshape(-1))
        remaining -= hi
        if remaining <= 1e-12 * dt:
            return y, first_k1
    new, _ = _rk4(field_for(pattern), y, remaining)
    return new, first_k1


def lyapunov(world: WorldState, params: RuleParams, x_star) -> float:
    """``½(||ṽ||² + ||k x̃ + ṽ||² + Σ_{i≠j} ||x_jⁱ - x_j*||²)``."""
    N = world.x.shape[0]
    xs = np.asarray(x_star, dtype=float).reshape(world.x.shape)
    xt = world.x - xs
    vt = world.v
    dev = world.est - xs[None, :, :]
    off = ~np.eye(N, dtype=bool)
    return 0.5 * (np.sum(vt * vt) + np.sum((params.k * xt + vt) ** 2) + np.sum(dev[off] ** 2))


def consensus_error(bold_x: np.ndarray) -> float:
    """``max_{i,j} ||𝒙ⁱ - 𝒙ʲ||``."""
    F = bold_x.reshape(bold_x.shape[0], -1)
    d = F[:, None, :] - F[None, :, :]
    return float(np.sqrt(np.max(np.sum(d * d, axis=-1))))


@dataclass
class Trajectory:
    times: np.ndarray
    x: np.ndarray
    v: np.ndarray
    bold_x: np.ndarray
    hat_x: np.ndarray
    eta: np.ndarray | None
    err_ne: np.ndarray | None
    err_consensus: np.ndarray
    V: np.ndarray | None
    events: list
    n_agents: int
    dim: int
    dt: float
    # per-step diagnostics (every integrator step, not strided)
    trigger_lhs: np.ndarray | None = field(default=None, repr=False)
    trigger_rhs: np.ndarray | None = field(default=None, repr=False)
    eta_steps: np.ndarray | None = field(default=None, repr=False)
    zeno_D: np.ndarray | None = None
    final_state: WorldState | None = field(default=None, repr=False)

    @property
    def final_x(self) -> np.ndarray:
        return self.x[-1]

    def first_time_below(self, level: float) -> float | None:
        if self.err_ne is None:
            raise ValueError("trajectory was run without a reference equilibrium")
        hit = np.flatnonzero(self.err_ne <= level)
        return float(self.times[hit[0]]) if hit.size else None


class _Recorder:
    def __init__(self, n_steps, stride, N, n, event, params, x_star):
        self.rows = {k: [] for k in ("t", "x", "v", "bold", "hat", "eta", "err", "cons", "V")}
        self.params, self.x_star, self.event = params, x_star, event
        self.lhs, self.rhs, self.eta_steps = [], [], []

    def snapshot(self, s: WorldState):
        B = s.bold_x
        r = self.rows
        r["t"].append(s.t)
        r["x"].append(s.x.reshape(-1).copy())
        r["v"].append(s.v.reshape(-1).copy())
        r["bold"].append(B.reshape(-1))
        r["hat"].append(s.hat_x.reshape(-1).copy())
        r["cons"].append(consensus_error(B))
        if self.event:
            r["eta"].append(s.eta.copy())
        if self.x_star is not None:
            r["err"].append(float(np.linalg.norm(s.x.reshape(-1) - self.x_star)))
            r["V"].append(lyapunov(s, self.params, self.x_star))

    def build(self, events, N, n, dt, D, final):
        r = self.rows
        arr = lambda k: np.array(r[k]) if r[k] else None  # noqa: E731
        return Trajectory(
            times=np.array(r["t"]), x=arr("x"), v=arr("v"), bold_x=arr("bold"), hat_x=arr("hat"),
            eta=arr("eta"), err_ne=arr("err"), err_consensus=np.array(r["cons"]), V=arr("V"),
            events=list(events), n_agents=N, dim=n, dt=dt,
            trigger_lhs=np.array(self.lhs) if self.lhs else None,
            trigger_rhs=np.array(self.rhs) if self.rhs else None,
            eta_steps=np.array(self.eta_steps) if self.eta_steps else None,
            zeno_D=D, final_state=final,
        )


def run(config: SimConfig, game: GameSpec, graph: Graph, x0=None, x_star=None, *, v0=None, estimates=None,
        state0: WorldState | None = None, regularity: RegularityConstants | None = None) -> Trajectory:
    """Integrate from the initial state to ``config.t_end``.

    Parameters
    ----------
    config : SimConfig
    game, graph
        The game and its communication topology.
    x0 : array_like, optional
        Initial strategies (length Nn). Ignored when ``state0`` is given.
    x_star : array_like, optional
        Reference equilibrium; enables the NE error and Lyapunov metrics.
    v0, estimates
        Forwarded to :func:`initial_state`.
    state0 : WorldState, optional
        Full initial state, overriding ``x0``/``v0``/``estimates``.
    regularity : RegularityConstants, optional
        When given, the governing gain condition is checked and a warning is
        issued if it fails. The run proceeds either way.

    Raises
    ------
    NumericalBlowup
        If any state magnitude exceeds 1e12; the partial trajectory is
        attached to the exception.
    """
    scheme = config.scheme
    m = _Model(game, graph, config.params, scheme)
    N, n = m.N, m.n
    event = scheme.variant is Variant.EVENT
    period = scheme.period_steps(config.dt) if scheme.variant is Variant.PERIODIC else None
    if regularity is not None:
        rep = conditions.governing_check(scheme.variant.value, config.params, graph_constants(graph, n), regularity)
        if not rep.satisfied:
            warnings.warn(f"gain conditions of {rep.theorem.value} are not satisfied; running anyway",
                          RuntimeWarning, stacklevel=2)

    if state0 is not None:
        s = state0.copy()
    else:
        if x0 is None:
            raise ConfigError("either x0 or state0 is required")
        s = initial_state(game, x0, v0, estimates, scheme)
    if event and s.eta is None:
        s.eta = scheme.initial_eta(N)
    xs = None if x_star is None else np.asarray(x_star, dtype=float).reshape(-1)

    rec = _Recorder(config.n_steps, config.record_stride, N, n, event, config.params, xs)
    trig = TriggerState.start(s.eta, s.t) if event else None
    periodic_log = [(i, s.t) for i in range(N)] if period else []
    D = np.zeros(N) if event else None

    def events():
        if trig is not None:
            return trig.event_log
        return periodic_log

    rec.snapshot(s)
    if event:
        lhs, rhs_ = trigger_lhs_rhs_all(s.bold_x, s.hat_x, s.eta, m.tc)
        rec.lhs.append(lhs)
        rec.rhs.append(rhs_)
        rec.eta_steps.append(s.eta.copy())

    for step in range(1, config.n_steps + 1):
        (x, v, est, eta), k1 = _advance(m, s, config.dt, config.integrator)
        if event:
            # Zeno constant: m_i ||d𝒙ⁱ/dt|| / sqrt(ρ η_i) at the step start
            dB = k1[2].copy()
            dB[m.idx, m.idx] = k1[0]
            rate = np.sqrt(np.sum(dB.reshape(N, -1) ** 2, axis=1))
            D = np.maximum(D, np.sqrt(m.tc.gain) * rate / np.sqrt(scheme.rho * s.eta))
        s = WorldState(step * config.dt, x, v, est, s.hat_x, eta)
        finite = all(np.all(np.isfinite(a)) for a in (x, v, est))
        if not finite or max(np.max(np.abs(x)), np.max(np.abs(v)), np.max(np.abs(est))) > BLOWUP:
            partial = rec.build(events(), N, n, config.dt, D, s)
            raise NumericalBlowup(f"state magnitude exceeded {BLOWUP:g} at t={s.t:g}", partial)
        B = s.bold_x
        if event:
            if np.any(s.eta <= 0):
                raise TriggerInvariantError(f"eta left the positive half-line at t={s.t:g}: {s.eta}")
            lhs, rhs_ = trigger_lhs_rhs_all(B, s.hat_x, s.eta, m.tc)
            rec.lhs.append(lhs)
            rec.rhs.append(rhs_)
            rec.eta_steps.append(s.eta.copy())
            trig.eta = s.eta
            fire = poll(scheme, step, B, s.hat_x, trig, m.tc)
            if fire.size:
                s.hat_x = s.hat_x.copy()
                s.hat_x[fire] = B[fire]
                trig.record(fire, s.t, step)
        elif period:
            if step % period == 0:
                s.hat_x = B.copy()
                periodic_log.extend((i, s.t) for i in range(N))
        else:
            s.hat_x = B.copy()
        if step % config.record_stride == 0 or step == config.n_steps:
            rec.snapshot(s)
    return rec.build(events(), N, n, config.dt, D, s)


def equilibrium_state(game: GameSpec, x_star, scheme: CommScheme | None = None) -> WorldState:
    """``(x*, 0, 1⊗x*)`` with broadcasts in agreement."""
    return initial_state(game, x_star, scheme=scheme)


# ---------------------------------------------------------------------------
# CSV


def write_trajectory_csv(traj: Trajectory, path) -> None:
    Nn = traj.n_agents * traj.dim
    header = (["t"] + [f"x_{j + 1}" for j in range(Nn)] + [f"v_{j + 1}" for j in range(Nn)]
              + ["err_ne", "err_consensus", "V"])
    nan = float("nan")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in range(len(traj.times)):
            err = traj.err_ne[r] if traj.err_ne is not None else nan
            V = traj.V[r] if traj.V is not None else nan
            w.writerow([repr(float(traj.times[r]))] + [repr(float(a)) for a in traj.x[r]]
                       + [repr(float(a)) for a in traj.v[r]] + [repr(float(err)), repr(float(traj.err_consensus[r])),
                                                                 repr(float(V))])


def write_events_csv(events, path) -> None:
    """Event log with 1-based ``agent_id`` and ``time`` columns."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["agent_id", "time"])
        for agent, t in events:
            w.writerow([agent + 1, repr(float(t))])


def read_events_csv(path) -> list[tuple[int, float]]:
    """Inverse of :func:`write_events_csv`; returns 0-based agents."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["agent_id", "time"]:
            raise ValueError(f"{path}: expected header 'agent_id,time', got {header}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            agent = int(row[0])
            if agent < 1:
                raise ValueError(f"{path}:{lineno}: agent_id must be >= 1")
            out.append((agent - 1, float(row[1])))
    return out
