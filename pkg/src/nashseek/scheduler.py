"""When agents refresh their broadcast copies.

Three variants: continuous (broadcast copies always equal the estimates),
periodic (synchronous refresh on a grid of period ``delta``) and the dynamic
event trigger, in which each agent compares its squared broadcast error with
neighbour disagreement plus ``rho * eta_i`` and ``eta_i`` follows its own
decaying dynamics.

Estimate stacks are arrays of shape ``(N, N, n)``: entry ``[i, j]`` is agent
i's estimate of agent j's strategy.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError, DeltaNotMultipleOfStep, TriggerInvariantError

ZENO_STREAK_WARN = 100


class Variant(str, Enum):
    CONTINUOUS = "continuous"
    PERIODIC = "periodic"
    EVENT = "event"


@dataclass(frozen=True)
class CommScheme:
    variant: Variant
    delta: float | None = None
    b: float | None = None
    rho: float | None = None
    eta0: np.ndarray | None = None

    def __post_init__(self):
        v = Variant(self.variant)
        object.__setattr__(self, "variant", v)
        if v is Variant.PERIODIC and not (self.delta is not None and self.delta > 0):
            raise ConfigError("periodic scheme requires delta > 0")
        if v is Variant.EVENT:
            if not (self.b is not None and self.b > 0 and self.rho is not None and self.rho > 0):
                raise ConfigError("event-triggered scheme requires b > 0 and rho > 0")
            if self.eta0 is not None:
                eta0 = np.array(self.eta0, dtype=float).reshape(-1)
                if np.any(eta0 <= 0):
                    raise ConfigError("eta0 entries must be positive")
                object.__setattr__(self, "eta0", eta0)

    @classmethod
    def continuous(cls):
        return cls(Variant.CONTINUOUS)

    @classmethod
    def periodic(cls, delta):
        return cls(Variant.PERIODIC, delta=float(delta))

    @classmethod
    def event_triggered(cls, b, rho, eta0=None):
        return cls(Variant.EVENT, b=float(b), rho=float(rho), eta0=eta0)

    def initial_eta(self, n_agents: int) -> np.ndarray:
        if self.eta0 is None:
            return np.ones(n_agents)
        if self.eta0.size == 1:
            return np.full(n_agents, float(self.eta0[0]))
        if self.eta0.size != n_agents:
            raise ConfigError(f"eta0 has {self.eta0.size} entries for {n_agents} agents")
        return self.eta0.copy()

    def period_steps(self, dt: float) -> int:
        """Number of integrator steps per period; rejects non-integer ratios."""
        ratio = self.delta / dt
        m = round(ratio)
        if m < 1 or abs(ratio - m) > 1e-9 * max(1.0, ratio):
            raise DeltaNotMultipleOfStep(f"delta={self.delta:g} is not an integer multiple of dt={dt:g}")
        return int(m)


@dataclass(frozen=True)
class TriggerConstants:
    """Everything the dynamic trigger needs besides the state."""

    weights: np.ndarray
    beta1: float
    beta2: float
    b: float
    rho: float

    @property
    def degrees(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    @property
    def gain(self) -> np.ndarray:
        """Per-agent ``β₁ + β₂ + 2d_i`` (the squared ``m`` of the Zeno analysis)."""
        return self.beta1 + self.beta2 + 2.0 * self.degrees


@dataclass
class TriggerState:
    eta: np.ndarray
    last_event_time: np.ndarray
    event_log: list = field(default_factory=list)
    streak: np.ndarray | None = None
    _last_step: np.ndarray | None = None

    @classmethod
    def start(cls, eta0: np.ndarray, t0: float = 0.0):
        N = len(eta0)
        return cls(eta=np.array(eta0, dtype=float), last_event_time=np.full(N, t0),
                   event_log=[(i, t0) for i in range(N)], streak=np.zeros(N, dtype=int),
                   _last_step=np.zeros(N, dtype=int))

    def record(self, agents, t: float, step: int) -> None:
        for i in agents:
            if t <= self.last_event_time[i]:
                raise TriggerInvariantError(f"non-increasing event time for agent {i + 1}")
            self.streak[i] = self.streak[i] + 1 if step - self._last_step[i] == 1 else 0
            if self.streak[i] == ZENO_STREAK_WARN:
                warnings.warn(f"agent {i + 1} triggered on {ZENO_STREAK_WARN} consecutive steps "
                              "(possible Zeno behaviour at step resolution)", RuntimeWarning, stacklevel=2)
            self._last_step[i] = step
            self.last_event_time[i] = t
            self.event_log.append((int(i), float(t)))


def disagreement(hat_x: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Per-agent ``½ Σ_j a_ij ||x̂ⁱ - x̂ʲ||²``."""
    H = hat_x.reshape(hat_x.shape[0], -1)
    diff = H[:, None, :] - H[None, :, :]
    dist = np.sum(diff * diff, axis=-1)
    return 0.5 * np.sum(weights * dist, axis=1)


def broadcast_error(bold_x: np.ndarray, hat_x: np.ndarray) -> np.ndarray:
    """Per-agent ``||x̂ⁱ - 𝒙ⁱ||²``."""
    e = (hat_x - bold_x).reshape(bold_x.shape[0], -1)
    return np.sum(e * e, axis=1)


def trigger_lhs_rhs_all(bold_x, hat_x, eta, tc: TriggerConstants):
    lhs = tc.gain * broadcast_error(bold_x, hat_x)
    rhs = disagreement(hat_x, tc.weights) + tc.rho * eta
    return lhs, rhs


def trigger_lhs_rhs(i: int, bold_x, hat_x, eta, tc: TriggerConstants) -> tuple[float, float]:
    """Both sides of agent ``i``'s trigger; it fires when ``lhs >= rhs``."""
    lhs, rhs = trigger_lhs_rhs_all(bold_x, hat_x, eta, tc)
    return float(lhs[i]), float(rhs[i])


def eta_rates(bold_x, hat_x, eta, tc: TriggerConstants) -> np.ndarray:
    return -tc.b * eta + disagreement(hat_x, tc.weights) - tc.gain * broadcast_error(bold_x, hat_x)


def eta_derivative(i: int, bold_x, hat_x, eta, tc: TriggerConstants) -> float:
    return float(eta_rates(bold_x, hat_x, eta, tc)[i])


def poll(scheme: CommScheme, step: int, bold_x, hat_x, state: TriggerState | None = None,
         tc: TriggerConstants | None = None, period_steps: int | None = None) -> np.ndarray:
    """Agents that broadcast at integrator step ``step`` (time ``step*dt``).

    Does not modify anything; the caller applies all refreshes together.
    """
    N = bold_x.shape[0]
    if scheme.variant is Variant.CONTINUOUS:
        return np.arange(N)
    if scheme.variant is Variant.PERIODIC:
        return np.arange(N) if step % period_steps == 0 else np.array([], dtype=int)
    lhs, rhs = trigger_lhs_rhs_all(bold_x, hat_x, state.eta, tc)
    return np.flatnonzero(lhs >= rhs)


def zeno_bound(rho: float, b: float, D: float) -> float:
    """Lower bound ``(2ρ/(b+ρ))·ln((b+ρ)/(2ρD) + 1)`` on inter-event times."""
    if D <= 0:
        raise ValueError("D must be positive")
    r = (b + rho) / (2.0 * rho)
    return math.log1p(r / D) / r


@dataclass(frozen=True)
class AgentStats:
    agent: int
    count: int
    min_interval: float | None
    mean_interval: float | None
    max_interval: float | None


def event_stats(log, horizon: float | None = None, n_agents: int | None = None) -> list[AgentStats]:
    """Per-agent event count and inter-event interval statistics.

    ``log`` is an iterable of ``(agent, time)`` pairs with 0-based agents.
    Intervals are undefined (``None``) for agents with fewer than two events.
    """
    times: dict[int, list[float]] = {}
    for agent, t in log:
        if horizon is None or t <= horizon + 1e-12:
            times.setdefault(int(agent), []).append(float(t))
    if n_agents is None:
        n_agents = max(times) + 1 if times else 0
    out = []
    for i in range(n_agents):
        ts = np.sort(np.array(times.get(i, []), dtype=float))
        if ts.size >= 2:
            iv = np.diff(ts)
            out.append(AgentStats(i, ts.size, float(iv.min()), float(iv.mean()), float(iv.max())))
        else:
            out.append(AgentStats(i, int(ts.size), None, None, None))
    return out


def format_stats(stats: list[AgentStats]) -> str:
    def cell(v, fmt):
        return "-" if v is None else format(v, fmt)

    rows = [
        ("Agent", [str(s.agent + 1) for s in stats]),
        ("Event times", [str(s.count) for s in stats]),
        ("Min interval", [cell(s.min_interval, ".4f") for s in stats]),
        ("Mean interval", [cell(s.mean_interval, ".4f") for s in stats]),
        ("Max interval", [cell(s.max_interval, ".4f") for s in stats]),
    ]
    return "\n".join(f"{label:<14}" + "".join(f"{v:>9}" for v in vals) for label, vals in rows)
