"""Five-firm Cournot benchmark on a ring network.

Firm ``i`` has cost

    J_i = δ_i + β_i |x_i - c_i| + γ_i x_i² - (p - a Σ_j x_j²) x_i

with the squared aggregate in the price taken as printed. The classical
linear aggregate ``Σ_j x_j`` is available through
``classic_linear_aggregate=True``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import graph as graphs
from .conditions import RuleParams
from .game import AbsKink, Constant, GameSpec, PriceCoupling, Quadratic, RegularityConstants
from .scheduler import CommScheme

DELTA = (5.0, 8.0, 6.0, 9.0, 7.0)
BETA = (12.0, 15.0, 8.0, 11.0, 13.0)
GAMMA = (0.4, 0.5, 0.5, 0.3, 0.3)
C = (25.0, 48.0, 15.0, 30.0, 45.0)
P_MAX = 10.0
A_SLOPE = 0.001
X0 = (25.0, 30.0, 20.0, 30.0, 35.0)

K = 4.0
ALPHA = 5.0
B = 0.01
RHO = 3.0
PERIOD = 0.1

# constants reported alongside the benchmark; not derived here
REPORTED_THETA = 1.001
REPORTED_W = 0.601
REPORTED_LAMBDA2 = 1.382


@dataclass(frozen=True)
class CournotPreset:
    game: GameSpec
    graph: graphs.Graph
    params: RuleParams
    schemes: dict
    x0: np.ndarray
    regularity: RegularityConstants


def cournot_game(classic_linear_aggregate: bool = False) -> GameSpec:
    agg = "linear" if classic_linear_aggregate else "squares"
    costs = [
        (Constant(d), AbsKink(b, c), Quadratic(g), PriceCoupling(P_MAX, A_SLOPE, agg))
        for d, b, g, c in zip(DELTA, BETA, GAMMA, C)
    ]
    return GameSpec(n_agents=5, dim=1, costs=tuple(costs))


def build(classic_linear_aggregate: bool = False, eta0: float = 1.0) -> CournotPreset:
    return CournotPreset(
        game=cournot_game(classic_linear_aggregate),
        graph=graphs.cycle(5),
        params=RuleParams(k=K, alpha=ALPHA),
        schemes={
            "continuous": CommScheme.continuous(),
            "periodic": CommScheme.periodic(PERIOD),
            "event": CommScheme.event_triggered(b=B, rho=RHO, eta0=np.full(5, eta0)),
        },
        x0=np.array(X0),
        regularity=RegularityConstants(theta=REPORTED_THETA, w=REPORTED_W),
    )
