"""The instrumented episode loop and an agent factory."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..env.sim import legal_mask, observation_key
from ..errors import InvalidArgument
from .base import RandomAgent
from .config import AgentConfig
from .core import untried_first
from .dql import DQLAgent, ExploitingAgent
from .ppo import PPOAgent
from .tabular import TabularAgent

AGENT_KINDS = ("random", "tabular", "dql", "dql-per", "pg")


@dataclass(frozen=True)
class StepRecord:
    episode: int
    step: int
    global_step: int
    action: object
    index: int
    reward: float
    cumulative_reward: float
    ratio: float
    ratio_before: float
    new_discovered: tuple
    new_owned: tuple
    discovered_count: int
    done: bool
    key: str
    epsilon: float | None
    probs: np.ndarray | None = None
    logits: np.ndarray | None = None
    values: np.ndarray | None = None
    features: np.ndarray | None = None


@dataclass(frozen=True)
class BatchRecord:
    episode: int
    batch: int
    loss: float
    deltas: np.ndarray | None = None
    rewards: np.ndarray | None = None
    keys: tuple = ()
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class EpisodeSummary:
    episode: int
    cumulative_reward: float
    steps: int
    final_ratio: float
    owned: int
    discovered: int
    flag: bool
    batches: int


class Hooks:
    """Base instrumentation sink; subclasses override what they need."""

    def on_step(self, record):
        pass

    def on_batch(self, record):
        pass

    def on_episode_end(self, summary):
        pass


def _batch_record(episode, raw):
    known = {"batch", "loss", "deltas", "rewards", "keys"}
    return BatchRecord(
        episode=episode,
        batch=int(raw["batch"]),
        loss=float(raw.get("loss", 0.0)),
        deltas=raw.get("deltas"),
        rewards=raw.get("rewards"),
        keys=tuple(raw.get("keys", ())),
        extra={k: v for k, v in raw.items() if k not in known},
    )


def run_episode(agent, env, hooks=(), episode=1, seed=0, global_step=0):
    """Play one episode, letting the agent learn as it goes.

    Every hook sees each step, each batch update and finally the episode
    summary, so the number of calls is ``steps + batches + 1`` per hook.
    """
    hooks = list(hooks)
    obs = env.reset(seed)
    agent.begin_episode(episode)
    features = env.encode(obs)
    total = 0.0
    steps = 0
    batches = 0
    flag_node = next((n.id for n in env.topology.nodes.values() if n.flag), None)
    done = False
    tried = set()
    while not done:
        actions = env.legal_actions()
        mask = legal_mask(obs, actions)
        key = observation_key(obs)
        ratio_before = env.ratio()
        action, index, info = agent.act(obs, untried_first(actions, tried), mask, features)
        tried.add(action)
        obs, reward, done, step_info = env.step(action)
        next_features = env.encode(obs)
        next_actions = env.legal_actions() if not done else []
        next_mask = legal_mask(obs, next_actions) if next_actions else np.zeros(len(mask), dtype=bool)
        info = dict(info, mask=mask, next_key=observation_key(obs))
        agent.record(features, index, reward, next_features, done, next_mask, key, info)
        total += reward
        steps += 1
        record = StepRecord(
            episode=episode, step=steps, global_step=global_step + steps, action=action,
            index=index, reward=float(reward), cumulative_reward=total, ratio=step_info["ratio"],
            ratio_before=ratio_before,
            new_discovered=tuple(step_info["new_discovered"]), new_owned=tuple(step_info["new_owned"]),
            discovered_count=len(env.state.discovered), done=done, key=key,
            epsilon=info.get("epsilon"), probs=info.get("probs"), logits=info.get("logits"),
            values=info.get("scores"), features=features,
        )
        for h in hooks:
            h.on_step(record)
        for raw in agent.step_updates():
            batches += 1
            br = _batch_record(episode, raw)
            for h in hooks:
                h.on_batch(br)
        features = next_features
    for raw in agent.end_episode(episode):
        batches += 1
        br = _batch_record(episode, raw)
        for h in hooks:
            h.on_batch(br)
    summary = EpisodeSummary(
        episode=episode, cumulative_reward=total, steps=steps, final_ratio=env.ratio(),
        owned=len(env.state.owned), discovered=len(env.state.discovered),
        flag=flag_node in env.state.owned, batches=batches,
    )
    for h in hooks:
        h.on_episode_end(summary)
    return summary


def make_agent(kind, env, config=None, seed=0, params=None):
    config = config or AgentConfig()
    n_actions = env.n_actions
    n_in = env.encode(env.reset(0)).shape[0]
    n_nodes = env.topology.max_nodes
    if kind == "random":
        return RandomAgent(n_actions, seed)
    if kind == "tabular":
        return TabularAgent(n_actions, config, seed)
    if kind in ("dql", "dql-per"):
        if kind == "dql-per" and not config.per_enabled:
            config = replace(config, per_enabled=True)
        return DQLAgent(n_in, n_actions, config, seed, n_nodes)
    if kind == "pg":
        return PPOAgent(n_in, n_actions, config, seed, n_nodes)
    if kind == "exploit":
        if params is None:
            raise InvalidArgument("exploit agent needs trained parameters")
        return ExploitingAgent(params, seed)
    raise InvalidArgument(f"unknown agent kind {kind!r}")
