import time
import warnings

import numpy as np
import pytest

from nashseek import cournot, engine
from nashseek.game import solve_ne

DT = 0.01
T_END = 15.0


@pytest.fixture(scope="session")
def preset():
    return cournot.build()


@pytest.fixture(scope="session")
def x_star(preset):
    return solve_ne(preset.game, preset.x0)


@pytest.fixture(scope="session")
def runs(preset, x_star):
    """The three benchmark runs at dt=0.01, T=15, with wall-clock durations."""
    out = {}
    for name, scheme in preset.schemes.items():
        cfg = engine.SimConfig(DT, T_END, preset.params, scheme)
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            traj = engine.run(cfg, preset.game, preset.graph, preset.x0, x_star)
        out[name] = (traj, time.perf_counter() - t0)
    return out


def fd_grad(fun, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


# one line per acceptance check, printed at the end of the session
ACCEPTANCE_LINES = []


def record(criterion: str, ok: bool, detail: str) -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
