import numpy as np
import pytest

from cyberxrl.agents import AgentConfig, TabularAgent, TabularQ
from cyberxrl.agents.loop import run_episode
from cyberxrl.env import AttackEnv, build_chain, legal_actions, observe, reset, step

CAP = 10_000
GAMMA = 0.9


def reachable(topology):
    """Map every reachable state key to a representative state and its outgoing transitions."""
    start, _ = reset(topology)
    graph, frontier = {}, [start]
    while frontier:
        s = frontier.pop()
        if s.key() in graph:
            continue
        edges = []
        for a in legal_actions(observe(s, topology, CAP)):
            nxt, _, r, done = step(s, topology, a, max_steps=CAP)
            edges.append((tuple(a.to_list()), r, nxt.key(), done))
            if not done:
                frontier.append(nxt)
        graph[s.key()] = edges
    return start.key(), graph


def value_iteration(graph, tol=1e-10):
    q = {(k, a): 0.0 for k, edges in graph.items() for a, *_ in edges}
    while True:
        v = {k: max((q[(k, a)] for a, *_ in edges), default=0.0) for k, edges in graph.items()}
        new = {(k, a): r + (0.0 if d else GAMMA * v[n]) for k, edges in graph.items() for a, r, n, d in edges}
        gap = max(abs(new[x] - q[x]) for x in q)
        q = new
        if gap < tol:
            return q


def test_tabular_sweeps_converge_to_value_iteration():
    _, graph = reachable(build_chain(1, seed=0))
    assert len(graph) > 5
    oracle = value_iteration(graph)
    table = TabularQ()
    for _ in range(400):
        snapshot = TabularQ()
        snapshot.table = dict(table.table)
        for k, edges in graph.items():
            for a, r, n, d in edges:
                nxt = 0.0 if d else max(snapshot.get(n, b) for b, *_ in graph[n])
                table.update(k, a, r, GAMMA, nxt, 0.5)
    err = max(abs(table.get(k, a) - v) for (k, a), v in oracle.items())
    assert err < 1e-3


def test_tabular_agent_learns_chain():
    env = AttackEnv(build_chain(1, seed=0), max_steps=60)
    agent = TabularAgent(env.n_actions, AgentConfig(), seed=0)
    rewards = [run_episode(agent, env, episode=e, seed=0).cumulative_reward for e in range(1, 31)]
    assert len(agent.q) > 0
    assert np.mean(rewards[-5:]) >= np.mean(rewards[:5])


def test_unseen_entries_read_zero():
    q = TabularQ()
    assert q.get("k", 3) == 0.0
    assert q.max_over("k", []) == 0.0
    q.set("k", 2, 1.5)
    assert q.values("k", 3).tolist() == [0.0, 1.5, 0.0]
