import math

import numpy as np
import pytest

from nashseek import engine
from nashseek.errors import ConfigError, DeltaNotMultipleOfStep, TriggerInvariantError
from nashseek.scheduler import (CommScheme, TriggerConstants, TriggerState, Variant, event_stats, eta_derivative,
                                format_stats, poll, trigger_lhs_rhs, zeno_bound)

from conftest import DT


def tc2(b=0.01, rho=3.0):
    return TriggerConstants(np.array([[0.0, 1.0], [1.0, 0.0]]), 1.0, 2.0, b, rho)


def test_scheme_validation():
    with pytest.raises(ConfigError):
        CommScheme.periodic(0.0)
    with pytest.raises(ConfigError):
        CommScheme.event_triggered(0.0, 1.0)
    with pytest.raises(ConfigError):
        CommScheme.event_triggered(0.1, 1.0, eta0=[1.0, -1.0])
    with pytest.raises(ConfigError):
        CommScheme.event_triggered(0.1, 1.0, eta0=[1.0, 1.0]).initial_eta(3)
    np.testing.assert_array_equal(CommScheme.event_triggered(0.1, 1.0).initial_eta(4), np.ones(4))


def test_period_must_be_step_multiple():
    assert CommScheme.periodic(0.15).period_steps(0.01) == 15
    assert CommScheme.periodic(0.1).period_steps(0.01) == 10
    with pytest.raises(DeltaNotMultipleOfStep):
        CommScheme.periodic(0.1).period_steps(0.03)


def test_poll_periodic_grid():
    B = np.zeros((3, 3, 1))
    fired = [s for s in range(31) if poll(CommScheme.periodic(0.1), s, B, B, period_steps=10).size == 3]
    assert fired == [0, 10, 20, 30]


def test_poll_continuous_all_agents():
    B = np.zeros((3, 3, 1))
    np.testing.assert_array_equal(poll(CommScheme.continuous(), 7, B, B), [0, 1, 2])


def test_poll_event_initialization_no_trigger():
    rng = np.random.default_rng(0)
    B = rng.normal(size=(2, 2, 1))
    state = TriggerState.start(np.ones(2))
    assert poll(CommScheme.event_triggered(0.01, 3.0), 0, B, B.copy(), state, tc2()).size == 0


def test_trigger_after_broadcast_and_at_consensus():
    B = np.array([[[0.0], [1.0]], [[2.0], [3.0]]])
    lhs, rhs = trigger_lhs_rhs(0, B, B, np.ones(2), tc2())
    assert lhs == 0.0 and rhs > 0
    C = np.tile(np.array([[1.5], [-0.5]]), (2, 1, 1))
    lhs, rhs = trigger_lhs_rhs(1, C, C, np.full(2, 0.2), tc2())
    assert lhs == 0.0 and rhs == pytest.approx(3.0 * 0.2)


def test_trigger_fires_on_large_error():
    hat = np.zeros((2, 2, 1))
    B = hat.copy()
    B[0, 0, 0] = 10.0
    lhs, rhs = trigger_lhs_rhs(0, B, hat, np.ones(2), tc2())
    assert lhs == pytest.approx((1 + 2 + 2) * 100.0) and lhs >= rhs
    state = TriggerState.start(np.ones(2))
    np.testing.assert_array_equal(poll(CommScheme.event_triggered(0.01, 3.0), 1, B, hat, state, tc2()), [0])


def test_eta_derivative_hand_example():
    hat = np.array([[[0.0], [0.0]], [[2.0], [0.0]]])  # ||x̂¹ - x̂²||² = 4
    assert eta_derivative(0, hat, hat, np.ones(2), tc2(b=0.01)) == pytest.approx(1.99)


def test_eta_pure_decay():
    B = np.ones((2, 2, 1))
    assert eta_derivative(1, B, B, np.array([1.0, 0.5]), tc2(b=0.2)) == pytest.approx(-0.1)


def test_trigger_state_invariants():
    st = TriggerState.start(np.ones(2), 0.0)
    assert st.event_log == [(0, 0.0), (1, 0.0)]
    with pytest.raises(TriggerInvariantError):
        st.record([0], 0.0, 0)
    with pytest.warns(RuntimeWarning, match="consecutive"):
        for step in range(1, 102):
            st.record([1], step * 0.01, step)


def test_zeno_bound_examples():
    for D in (0.1, 1.0, 7.0):
        assert zeno_bound(2.0, 2.0, D) == pytest.approx(math.log(1 / D + 1))
    grid = [zeno_bound(3.0, 0.01, D) for D in np.geomspace(1e-2, 1e6, 50)]
    assert all(a > b > 0 for a, b in zip(grid, grid[1:]))
    assert grid[-1] < 1e-5
    with pytest.raises(ValueError):
        zeno_bound(1.0, 1.0, 0.0)


def test_event_stats_edge_cases():
    stats = event_stats([(0, 0.0), (1, 0.0), (1, 0.5)], n_agents=3)
    assert stats[0].count == 1 and stats[0].min_interval is None
    assert stats[1].mean_interval == pytest.approx(0.5)
    assert stats[2].count == 0 and stats[2].max_interval is None
    assert event_stats([]) == []
    empty = event_stats([], n_agents=2)
    assert [s.count for s in empty] == [0, 0]
    assert "-" in format_stats(empty)


def test_event_stats_horizon():
    log = [(0, t) for t in (0.0, 0.4, 1.0, 1.5)]
    assert event_stats(log, horizon=1.0)[0].count == 3


def test_periodic_log_stats(preset, x_star):
    cfg = engine.SimConfig(DT, 1.0, preset.params, CommScheme.periodic(0.1))
    traj = engine.run(cfg, preset.game, preset.graph, preset.x0, x_star)
    for s in event_stats(traj.events, 1.0, 5):
        assert s.count == 11
        assert s.min_interval == pytest.approx(0.1) and s.max_interval == pytest.approx(0.1)
        assert s.mean_interval == pytest.approx(0.1)


def test_format_stats_layout():
    text = format_stats(event_stats([(0, 0.0), (0, 0.25), (1, 0.0)], n_agents=2))
    lines = text.splitlines()
    assert [l.split()[0] for l in lines] == ["Agent", "Event", "Min", "Mean", "Max"]
    assert lines[0].split()[1:] == ["1", "2"]
    assert "0.2500" in lines[2]


# --- along the benchmark event-triggered run ------------------------------

@pytest.fixture(scope="module")
def event_run(runs):
    return runs["event"][0]


def test_trigger_soundness(event_run):
    lhs, rhs = event_run.trigger_lhs, event_run.trigger_rhs
    n_steps = lhs.shape[0] - 1
    fired = np.zeros((n_steps + 1, 5), dtype=bool)
    for agent, t in event_run.events:
        step = int(round(t / DT))
        assert abs(step * DT - t) < 1e-9
        assert not fired[step, agent]  # one event per agent per step
        fired[step, agent] = True
    assert fired[0].all()  # initial broadcast
    for m in range(1, n_steps + 1):
        np.testing.assert_array_equal(fired[m], lhs[m] >= rhs[m])


def test_broadcast_error_reset(event_run):
    for agent, t in event_run.events:
        r = int(round(t / DT))
        np.testing.assert_array_equal(event_run.hat_x[r].reshape(5, 5)[agent],
                                      event_run.bold_x[r].reshape(5, 5)[agent])


def test_event_log_strictly_increasing(event_run):
    for i in range(5):
        ts = [t for a, t in event_run.events if a == i]
        assert all(b > a for a, b in zip(ts, ts[1:]))


def test_eta_positive_and_envelope(event_run, preset):
    eta = event_run.eta_steps
    t = np.arange(eta.shape[0]) * DT
    scheme = preset.schemes["event"]
    floor = scheme.initial_eta(5)[None, :] * np.exp(-(scheme.b + scheme.rho) * t)[:, None] - 10 * DT
    assert eta.min() > 0
    assert np.all(eta >= floor)


def test_snapshot_at_one_second(event_run):
    """Regression fixture recorded from the verified benchmark run."""
    m = int(round(1.0 / DT))
    np.testing.assert_allclose(event_run.trigger_lhs[m],
                               [1.8323870207851782, 0.6459215264374005, 0.06700972620205044,
                                1.5807521048521094, 0.5684764757858709], rtol=1e-6)
    np.testing.assert_allclose(event_run.trigger_rhs[m],
                               [2.502186165577911, 4.40605678320455, 5.211541473089365,
                                4.052595452290764, 1.9961615001480046], rtol=1e-6)


def test_variant_enum():
    assert Variant("event") is Variant.EVENT
