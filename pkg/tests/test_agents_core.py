import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyberxrl.agents import (
    AdditiveRamp, AgentConfig, EarlyExploitPiecewise, MultiplicativeDecay, StandardPiecewise, epsilon_at,
    q_update, select_action,
)
from cyberxrl.agents.core import masked_softmax, resolve, untried_first
from cyberxrl.agents.schedules import schedule_from_dict, schedule_to_dict
from cyberxrl.env import Action
from cyberxrl.errors import InvalidArgument, NoLegalAction

EARLY = EarlyExploitPiecewise(eps_low=0.1, eps_high=0.9, t_exploit=100, horizon=500)
STANDARD = StandardPiecewise(eps_low=0.1, eps_high=0.9, t_explore=100, horizon=500)
ADDITIVE = AdditiveRamp(eps_start=0.001, increment=0.005, eps_cap=0.9)
MULT = MultiplicativeDecay(eps_start=0.9, factor=0.95, eps_floor=0.01)


@pytest.mark.parametrize("schedule,t,expected", [
    (EARLY, 0, 0.1), (EARLY, 100, 0.1), (EARLY, 300, 0.5), (EARLY, 500, 0.9), (EARLY, 10_000, 0.9),
    (STANDARD, 0, 0.9), (STANDARD, 100, 0.9), (STANDARD, 300, 0.5), (STANDARD, 500, 0.1), (STANDARD, 9_999, 0.1),
    (ADDITIVE, 0, 0.001), (ADDITIVE, 10, 0.051), (ADDITIVE, 1000, 0.9),
    (MULT, 0, 0.9), (MULT, 1, 0.855), (MULT, 2, 0.81225), (MULT, 200, 0.01),
])
def test_epsilon_values(schedule, t, expected):
    assert epsilon_at(schedule, t) == pytest.approx(expected, abs=1e-12)


def test_paper_default_schedule_endpoints():
    s = StandardPiecewise(0.1, 0.9, 0, 5000)
    assert epsilon_at(s, 0) == 0.9
    assert epsilon_at(s, 2500) == pytest.approx(0.5)
    assert epsilon_at(s, 5000) == pytest.approx(0.1)


@pytest.mark.parametrize("schedule", [EARLY, STANDARD, ADDITIVE, MULT])
def test_schedule_dict_round_trip(schedule):
    assert schedule_from_dict(schedule_to_dict(schedule)) == schedule


def test_schedule_validation():
    with pytest.raises(InvalidArgument):
        StandardPiecewise(0.1, 1.5, 0, 10)
    with pytest.raises(InvalidArgument):
        MultiplicativeDecay(0.9, 0.0, 0.01)
    with pytest.raises(InvalidArgument):
        epsilon_at(STANDARD, -1)


@settings(max_examples=80, deadline=None)
@given(lo=st.floats(0, 1), hi=st.floats(0, 1), t0=st.integers(0, 50), span=st.integers(1, 200))
def test_piecewise_monotone_and_bounded(lo, hi, t0, span):
    lo, hi = min(lo, hi), max(lo, hi)
    early = EarlyExploitPiecewise(lo, hi, t0, t0 + span)
    std = StandardPiecewise(lo, hi, t0, t0 + span)
    ts = range(0, t0 + span + 20, 3)
    e = [epsilon_at(early, t) for t in ts]
    s = [epsilon_at(std, t) for t in ts]
    assert all(b >= a - 1e-12 for a, b in zip(e, e[1:]))
    assert all(b <= a + 1e-12 for a, b in zip(s, s[1:]))
    assert all(lo - 1e-12 <= v <= hi + 1e-12 for v in e + s)


def test_q_update_examples():
    assert q_update(0.0, 1.0, 0.95, 0.0, 0.5) == pytest.approx(0.5, abs=1e-12)
    assert q_update(2.0, 0.0, 0.9, 10.0, 1.0) == pytest.approx(9.0, abs=1e-12)
    assert q_update(1.0, -1.0, 0.95, 2.0, 0.1) == pytest.approx(1.0 + 0.1 * (-1.0 + 1.9 - 1.0), abs=1e-12)


@pytest.mark.parametrize("alpha", [0.0, -0.1, 1.5])
def test_q_update_rejects_bad_alpha(alpha):
    with pytest.raises(InvalidArgument):
        q_update(0.0, 1.0, 0.9, 0.0, alpha)


def test_select_action_greedy_and_ties(rng):
    legal = np.array([True, True, True, False])
    assert select_action(np.array([0.1, -0.2, 0.7, 9.0]), legal, 0.0, rng) == 3
    assert select_action(np.array([1.0, 1.0, 0.0, 0.0]), legal, 0.0, rng) == 1


def test_select_action_no_legal(rng):
    with pytest.raises(NoLegalAction):
        select_action(np.zeros(3), np.zeros(3, dtype=bool), 0.5, rng)


def test_select_action_full_exploration_is_uniform_over_legal():
    rng = np.random.default_rng(0)
    legal = np.array([True, False, True, True])
    picks = [select_action(np.array([5.0, 0, 0, 0]), legal, 1.0, rng) for _ in range(6000)]
    counts = np.bincount(picks, minlength=5)[1:]
    assert counts[1] == 0
    assert np.all(np.abs(counts[[0, 2, 3]] / 6000 - 1 / 3) < 0.03)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=2, max_size=18), st.floats(-1e3, 1e3))
def test_argmax_invariant_under_shift(values, c):
    scores = np.array(values)
    legal = np.ones(len(values), dtype=bool)
    a = select_action(scores, legal, 0.0, np.random.default_rng(0))
    b = select_action(scores + c, legal, 0.0, np.random.default_rng(0))
    if np.sort(scores)[-1] - np.sort(scores)[-2] > 1e-6:
        assert a == b


def test_masked_softmax():
    p = masked_softmax(np.array([1.0, 2.0, 3.0]), np.array([True, False, True]))
    assert p[1] == 0.0
    assert p.sum() == pytest.approx(1.0)
    assert p[2] / p[0] == pytest.approx(np.e ** 2)


def test_resolve_picks_among_matching_triples(rng):
    acts = [Action(2, "a", "x"), Action(2, "a", "y"), Action(3, "a")]
    seen = {resolve(acts, 2, rng) for _ in range(50)}
    assert seen == {Action(2, "a", "x"), Action(2, "a", "y")}
    assert resolve(acts, 3, rng) == Action(3, "a")
    with pytest.raises(NoLegalAction):
        resolve(acts, 1, rng)


def test_untried_first_keeps_every_index():
    a, b, c = Action(2, "a", "x"), Action(2, "a", "y"), Action(3, "a")
    assert untried_first([a, b, c], set()) == [a, b, c]
    assert untried_first([a, b, c], {a}) == [b, c]
    assert untried_first([a, b, c], {a, b, c}) == [a, b, c]
    assert {x.index for x in untried_first([a, b, c], {a, c})} == {2, 3}


def test_agent_config_round_trip():
    cfg = AgentConfig(schedule=EARLY, per_enabled=True, loss="huber")
    assert AgentConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(InvalidArgument):
        AgentConfig.from_dict({"nope": 1})
    with pytest.raises(InvalidArgument):
        AgentConfig(loss="l1")
