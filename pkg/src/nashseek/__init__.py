"""Distributed Nash-equilibrium seeking for double-integrator agents.

Continuous, periodic and dynamic event-triggered communication, gain-condition
checks and independent equilibrium oracles.
"""

from . import conditions, cournot, engine, game, graph, scheduler
from .conditions import RuleParams, check_corollary1, check_theorem1, check_theorem2, check_theorem3
from .engine import SimConfig, Trajectory, WorldState, lyapunov, run
from .errors import *  # noqa: F401,F403
from .game import (GameSpec, RegularityConstants, augmented_map, best_response_ne, estimate_constants,
                   pseudogradient, solve_ne, subdiff, verify_ne)
from .graph import Graph, GraphConstants, constants, is_connected, laplacian
from .scheduler import CommScheme, event_stats, zeno_bound

__version__ = "0.1.0"
