"""Run configuration files (JSON) and the built-in ``cournot5`` preset.

The whole document is validated against a schema before anything is built;
unknown keys anywhere are rejected.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from . import cournot
from . import graph as graphs
from .conditions import RuleParams
from .engine import SimConfig
from .errors import ConfigError
from .game import GameSpec, RegularityConstants, term_from_dict
from .scheduler import CommScheme

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_vec = {"type": "array", "items": _num}

TERM_SCHEMA = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["constant", "affine", "quadratic", "pairwise_quadratic", "price_coupling", "abs"]},
        "c": _num, "coef": {"anyOf": [_num, _vec]}, "offset": {"anyOf": [_num, _vec]},
        "Q": {"anyOf": [_num, {"type": "array"}]}, "center": {"anyOf": [_num, _vec]},
        "other": {"type": "integer", "minimum": 0}, "weight": {"anyOf": [_num, _vec]},
        "p": _num, "a": _num, "aggregate": {"enum": ["squares", "linear"]},
    },
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "required": ["game", "graph", "params"],
    "additionalProperties": False,
    "properties": {
        "game": {"anyOf": [
            {"enum": ["cournot5"]},
            {"type": "object", "additionalProperties": False, "required": ["preset"],
             "properties": {"preset": {"enum": ["cournot5"]}, "classic_linear_aggregate": {"type": "boolean"}}},
            {"type": "object", "additionalProperties": False, "required": ["n_agents", "dim", "costs"],
             "properties": {"n_agents": {"type": "integer", "minimum": 1}, "dim": {"type": "integer", "minimum": 1},
                            "costs": {"type": "array", "items": {"type": "array", "items": TERM_SCHEMA}}}},
        ]},
        "graph": {"anyOf": [
            {"type": "object", "additionalProperties": False, "required": ["preset", "n"],
             "properties": {"preset": {"enum": sorted(graphs.PRESETS)}, "n": {"type": "integer", "minimum": 1},
                            "weight": _pos}},
            {"type": "object", "additionalProperties": False, "required": ["weights"],
             "properties": {"weights": {"type": "array", "items": _vec}, "directed": {"type": "boolean"}}},
        ]},
        "params": {"type": "object", "additionalProperties": False, "required": ["k", "alpha"],
                   "properties": {"k": _pos, "alpha": _pos}},
        "scheme": {"anyOf": [
            {"type": "object", "additionalProperties": False, "required": ["type"],
             "properties": {"type": {"const": "continuous"}}},
            {"type": "object", "additionalProperties": False, "required": ["type", "delta"],
             "properties": {"type": {"const": "periodic"}, "delta": _pos}},
            {"type": "object", "additionalProperties": False, "required": ["type", "b", "rho"],
             "properties": {"type": {"const": "event"}, "b": _pos, "rho": _pos,
                            "eta0": {"anyOf": [_pos, {"type": "array", "items": _pos}]}}},
        ]},
        "sim": {"type": "object", "additionalProperties": False,
                "properties": {"dt": _pos, "t_end": {"type": "number", "minimum": 0},
                               "record_stride": {"type": "integer", "minimum": 1}, "seed": {"type": "integer"},
                               "integrator": {"enum": ["rk4", "euler"]}}},
        "init": {"type": "object", "additionalProperties": False,
                 "properties": {"x0": _vec, "v0": _vec,
                                "estimates": {"anyOf": [{"const": "broadcast-own"}, {"type": "array"}]}}},
        "regularity": {"anyOf": [
            {"type": "object", "additionalProperties": False, "required": ["theta", "w"],
             "properties": {"theta": _pos, "w": _pos}},
            {"type": "object", "additionalProperties": False, "required": ["box"],
             "properties": {"box": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
                            "samples": {"type": "integer", "minimum": 2}, "seed": {"type": "integer"}}},
        ]},
        "oracle": {"type": "object", "additionalProperties": False,
                   "properties": {"step": _pos, "tol": _pos, "max_iter": {"type": "integer", "minimum": 1}}},
        "outputs": {"type": "object", "additionalProperties": False,
                    "properties": {"trajectory_path": {"type": "string"}, "events_path": {"type": "string"},
                                   "report_path": {"type": "string"}}},
    },
}

DEFAULT_SCHEMES = {
    "continuous": {"type": "continuous"},
    "periodic": {"type": "periodic", "delta": cournot.PERIOD},
    "event": {"type": "event", "b": cournot.B, "rho": cournot.RHO, "eta0": 1.0},
}

COURNOT5 = {
    "game": "cournot5",
    "graph": {"preset": "cycle", "n": 5, "weight": 1.0},
    "params": {"k": cournot.K, "alpha": cournot.ALPHA},
    "scheme": DEFAULT_SCHEMES["event"],
    "sim": {"dt": 0.01, "t_end": 15.0, "record_stride": 1, "seed": 0, "integrator": "rk4"},
    "init": {"x0": list(cournot.X0), "estimates": "broadcast-own"},
    "regularity": {"theta": cournot.REPORTED_THETA, "w": cournot.REPORTED_W},
}

PRESETS = {"cournot5": COURNOT5}


@dataclass
class RunSetup:
    game: GameSpec
    graph: graphs.Graph
    params: RuleParams
    scheme: CommScheme
    sim: SimConfig
    x0: np.ndarray
    v0: np.ndarray | None
    estimates: object
    regularity_spec: dict | None
    oracle: dict
    outputs: dict
    seed: int


def load(source: str, scheme_override: str | None = None) -> dict:
    """Read a config from a preset name or a JSON file, apply overrides and validate."""
    if source in PRESETS:
        doc = copy.deepcopy(PRESETS[source])
    else:
        path = Path(source)
        try:
            doc = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {source}") from None
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {source}: {exc}") from None
    if scheme_override is not None:
        current = doc.get("scheme", {})
        doc["scheme"] = current if current.get("type") == scheme_override else dict(DEFAULT_SCHEMES[scheme_override])
    validate(doc)
    return doc


def validate(doc: dict) -> None:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from None


def build_game(spec) -> GameSpec:
    if spec == "cournot5":
        return cournot.cournot_game()
    if isinstance(spec, dict) and "preset" in spec:
        return cournot.cournot_game(spec.get("classic_linear_aggregate", False))
    try:
        costs = tuple(tuple(term_from_dict(t) for t in agent) for agent in spec["costs"])
        return GameSpec(spec["n_agents"], spec["dim"], costs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_graph(spec) -> graphs.Graph:
    try:
        if "preset" in spec:
            return graphs.PRESETS[spec["preset"]](spec["n"], spec.get("weight", 1.0))
        return graphs.Graph(np.array(spec["weights"], dtype=float), directed=spec.get("directed", False))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_scheme(spec) -> CommScheme:
    kind = spec["type"]
    if kind == "continuous":
        return CommScheme.continuous()
    if kind == "periodic":
        return CommScheme.periodic(spec["delta"])
    return CommScheme.event_triggered(spec["b"], spec["rho"], spec.get("eta0"))


def setup(doc: dict) -> RunSetup:
    """Turn a validated document into domain objects; raises ConfigError on inconsistency."""
    game = build_game(doc["game"])
    graph = build_graph(doc["graph"])
    if graph.n_agents != game.n_agents:
        raise ConfigError(f"graph has {graph.n_agents} nodes but the game has {game.n_agents} agents")
    try:
        params = RuleParams(**doc["params"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    scheme = build_scheme(doc.get("scheme", {"type": "continuous"}))
    if scheme.eta0 is not None:
        scheme.initial_eta(game.n_agents)
    s = doc.get("sim", {})
    sim = SimConfig(dt=s.get("dt", 0.01), t_end=s.get("t_end", 15.0), params=params, scheme=scheme,
                    record_stride=s.get("record_stride", 1), integrator=s.get("integrator", "rk4"))
    init = doc.get("init", {})
    x0 = np.array(init.get("x0", np.zeros(game.size)), dtype=float)
    if x0.size != game.size:
        raise ConfigError(f"init.x0 has {x0.size} entries, expected {game.size}")
    v0 = init.get("v0")
    if v0 is not None:
        v0 = np.array(v0, dtype=float)
        if v0.size != game.size:
            raise ConfigError(f"init.v0 has {v0.size} entries, expected {game.size}")
    est = init.get("estimates", "broadcast-own")
    if not isinstance(est, str):
        est = np.array(est, dtype=float)
        if est.size != game.n_agents * game.size:
            raise ConfigError(f"init.estimates has {est.size} entries, expected {game.n_agents * game.size}")
    return RunSetup(game, graph, params, scheme, sim, x0, v0, est, doc.get("regularity"),
                    doc.get("oracle", {}), doc.get("outputs", {}), s.get("seed", 0))


def regularity_from(spec: dict | None, game: GameSpec, x0: np.ndarray) -> RegularityConstants:
    """Supplied constants, or a sampled estimate over the configured box.

    Without a ``regularity`` block the box spans the initial strategies
    padded by 10 on each side.
    """
    from .game import estimate_constants

    if spec is not None and "theta" in spec:
        try:
            return RegularityConstants(spec["theta"], spec["w"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if spec is None:
        box, samples, seed = (float(x0.min()) - 10.0, float(x0.max()) + 10.0), 10_000, 42
    else:
        box, samples, seed = tuple(spec["box"]), spec.get("samples", 10_000), spec.get("seed", 42)
    return estimate_constants(game, box, samples, seed)
