"""Step semantics, observation projection and feature encoding.

States are immutable; :func:`step` returns a new :class:`EnvState`. Given a
topology and an action sequence the simulator is fully deterministic, so the
observation function reduces to a projection of the hidden state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import IllegalAction, InvalidArgument
from .actions import CONNECT, LOCAL, REMOTE

DEFAULT_MAX_STEPS = 200
DEFAULT_PROBE_PENALTY = 1

OWNED, DISCOVERED = "owned", "discovered"


@dataclass(frozen=True, order=True)
class Action:
    index: int
    source: str
    target: str | None = None

    def to_list(self):
        return [self.index, self.source, self.target]

    @classmethod
    def from_list(cls, seq):
        index, source, target = seq
        return cls(int(index), source, target)


@dataclass(frozen=True)
class EnvState:
    owned: frozenset
    discovered: frozenset
    credentials: frozenset = frozenset()
    revealed: frozenset = frozenset()
    t: int = 0
    cumulative_reward: int = 0
    done: bool = False

    def key(self):
        """Canonical, order-normalised identity used by tabular learners."""
        return "O:{}|D:{}|C:{}".format(
            ",".join(sorted(self.owned)),
            ",".join(sorted(self.discovered - self.owned)),
            ",".join(sorted(c.id for c in self.credentials)),
        )


@dataclass(frozen=True)
class Row:
    id: str
    status: str
    properties: tuple
    local_attacks: tuple
    remote_attacks: tuple


@dataclass(frozen=True)
class Observation:
    rows: tuple
    credentials: tuple
    links: tuple
    ladder: tuple
    t: int
    max_steps: int

    @property
    def owned(self):
        return [r.id for r in self.rows if r.status == OWNED]

    @property
    def visible(self):
        return [r.id for r in self.rows]


def reset(topology, seed=0):
    """Initial state: only the entry node is owned and visible.

    ``seed`` is accepted for interface symmetry; the simulator draws no
    randomness, so equal seeds trivially give equal states.
    """
    del seed
    state = EnvState(owned=frozenset([topology.entry]), discovered=frozenset([topology.entry]))
    return state, observe(state, topology)


def _visible_properties(node, state, owned):
    extra = sorted(p for n, p in state.revealed if n == node.id)
    if owned:
        props = list(node.properties)
        props += [p for p in extra if p not in props]
        return tuple(props)
    return tuple(extra)


def observe(state, topology, max_steps=DEFAULT_MAX_STEPS):
    rows = []
    for nid in sorted(state.discovered, key=lambda n: (n not in state.owned, n)):
        node = topology.nodes[nid]
        owned = nid in state.owned
        local = tuple(v.label for _, v in sorted(node.local_vulns.items())) if owned else None
        remote = tuple(v.label for _, v in sorted(node.remote_vulns.items()))
        rows.append(Row(nid, OWNED if owned else DISCOVERED,
                        _visible_properties(node, state, owned), local, remote))
    links = tuple(sorted((a, b) for a, b in topology.edges
                         if a in state.discovered and b in state.discovered))
    return Observation(tuple(rows), tuple(sorted(state.credentials)), links,
                       topology.ladder, state.t, max_steps)


def legal_actions(observation):
    """Every (action, source, target) triple executable from this observation.

    Local actions may be attempted from any owned node, remote actions against
    any visible node linked from an owned node, and connect actions only where
    a known credential names the target and the action's service.
    """
    owned = sorted(observation.owned)
    visible = set(observation.visible)
    succ = {}
    for a, b in observation.links:
        succ.setdefault(a, []).append(b)
    by_service = {spec.service: spec.index for spec in observation.ladder if spec.kind == CONNECT}
    out = []
    for spec in observation.ladder:
        if spec.kind == LOCAL:
            out.extend(Action(spec.index, src) for src in owned)
        elif spec.kind == REMOTE:
            for src in owned:
                out.extend(Action(spec.index, src, tgt) for tgt in sorted(succ.get(src, ())))
    for cred in observation.credentials:
        index = by_service.get(cred.service)
        if index is None or cred.target not in visible:
            continue
        for src in owned:
            if cred.target in succ.get(src, ()):
                out.append(Action(index, src, cred.target))
    out = sorted(set(out), key=lambda a: (a.index, a.source, a.target or ""))
    return out


def observation_key(observation):
    """Same canonical key as :meth:`EnvState.key`, computed from what the agent sees."""
    owned = sorted(r.id for r in observation.rows if r.status == OWNED)
    disc = sorted(r.id for r in observation.rows if r.status != OWNED)
    return "O:{}|D:{}|C:{}".format(",".join(owned), ",".join(disc),
                                   ",".join(sorted(c.id for c in observation.credentials)))


def legal_mask(observation, actions=None):
    """Boolean mask over ladder positions (0-based) that have at least one legal triple."""
    if actions is None:
        actions = legal_actions(observation)
    mask = np.zeros(len(observation.ladder), dtype=bool)
    for a in actions:
        mask[a.index - 1] = True
    return mask


def compromise_ratio(state, topology):
    return len(state.owned) / topology.max_nodes


def step(state, topology, action, *, max_steps=DEFAULT_MAX_STEPS, probe_penalty=DEFAULT_PROBE_PENALTY):
    """Apply one action; returns ``(state, observation, reward, done)``."""
    spec = topology.spec(action.index)
    if state.done:
        raise IllegalAction("episode already finished")
    if state.t >= max_steps:
        raise IllegalAction(f"step cap {max_steps} reached")
    if action.source not in state.owned:
        raise IllegalAction(f"source {action.source!r} is not owned")

    owned, discovered = set(state.owned), set(state.discovered)
    creds, revealed = set(state.credentials), set(state.revealed)
    done = False

    def apply(vuln, node_id):
        discovered.update(vuln.reveals)
        for cred in vuln.leaks:
            creds.add(cred)
            discovered.add(cred.target)
        revealed.update((node_id, p) for p in vuln.properties)

    if spec.kind == LOCAL:
        if action.target not in (None, action.source):
            raise IllegalAction("local actions act on their source node")
        vuln = topology.nodes[action.source].local_vulns.get(spec.index)
        if vuln is None:
            reward = -probe_penalty
        else:
            apply(vuln, action.source)
            reward = 0
    else:
        target = action.target
        if target is None or target not in state.discovered:
            raise IllegalAction(f"target {target!r} is not discovered")
        if target not in topology.successors(action.source):
            raise IllegalAction(f"no link {action.source!r} -> {target!r}")
        node = topology.nodes[target]
        if spec.kind == REMOTE:
            vuln = node.remote_vulns.get(spec.index)
            if vuln is None:
                reward = -probe_penalty
            else:
                apply(vuln, target)
                reward = 0
        else:
            if not any(c.target == target and c.service == spec.service for c in state.credentials):
                raise IllegalAction(f"no known {spec.service} credential for {target!r}")
            if target in owned:
                reward = 0
            else:
                owned.add(target)
                reward = node.value
                done = node.flag

    t = state.t + 1
    done = done or t >= max_steps
    new = EnvState(frozenset(owned), frozenset(discovered | owned), frozenset(creds),
                   frozenset(revealed), t, state.cumulative_reward + reward, done)
    return new, observe(new, topology, max_steps), reward, done


def encode_observation(observation, topology):
    """Fixed-length features: node status slots, credential bits, step and C_t.

    Layout is ``[status(node) / 2 for node in topology order]`` (0 unknown,
    0.5 discovered, 1 owned), then one bit per topology credential, then
    ``t / max_steps`` and the compromise ratio. See :func:`encoding_dim`.
    """
    node_pos = {nid: i for i, nid in enumerate(topology.nodes)}
    cred_pos = {c.id: i for i, c in enumerate(topology.credentials)}
    n, c = len(node_pos), len(cred_pos)
    vec = np.zeros(n + c + 2)
    owned = 0
    for row in observation.rows:
        if row.status == OWNED:
            vec[node_pos[row.id]] = 1.0
            owned += 1
        else:
            vec[node_pos[row.id]] = 0.5
    for cred in observation.credentials:
        vec[n + cred_pos[cred.id]] = 1.0
    vec[n + c] = observation.t / observation.max_steps
    vec[n + c + 1] = owned / topology.max_nodes
    return vec


def encoding_dim(topology):
    return len(topology.nodes) + len(topology.credentials) + 2


class AttackEnv:
    """Stateful convenience wrapper around :func:`reset` / :func:`step`."""

    def __init__(self, topology, max_steps=DEFAULT_MAX_STEPS, probe_penalty=DEFAULT_PROBE_PENALTY):
        if max_steps < 1:
            raise InvalidArgument("max_steps must be >= 1")
        self.topology = topology
        self.max_steps = max_steps
        self.probe_penalty = probe_penalty
        self.state = None
        self.observation = None

    @property
    def n_actions(self):
        return len(self.topology.ladder)

    def reset(self, seed=0):
        self.state, _ = reset(self.topology, seed)
        self.observation = observe(self.state, self.topology, self.max_steps)
        return self.observation

    def legal_actions(self):
        return legal_actions(self.observation)

    def encode(self, observation=None):
        return encode_observation(observation or self.observation, self.topology)

    def ratio(self):
        return compromise_ratio(self.state, self.topology)

    def step(self, action):
        prev = self.state
        self.state, self.observation, reward, done = step(
            prev, self.topology, action, max_steps=self.max_steps, probe_penalty=self.probe_penalty)
        info = {
            "new_discovered": sorted(self.state.discovered - prev.discovered),
            "new_owned": sorted(self.state.owned - prev.owned),
            "ratio": compromise_ratio(self.state, self.topology),
        }
        return self.observation, reward, done, info


def with_state(env, state):
    """Point ``env`` at an arbitrary state (used by exhaustive searches)."""
    env.state = state
    env.observation = observe(state, env.topology, env.max_steps)
    return env


__all__ = [
    "Action", "EnvState", "Observation", "Row", "AttackEnv", "reset", "observe", "step",
    "legal_actions", "legal_mask", "observation_key", "compromise_ratio", "encode_observation", "encoding_dim",
    "with_state",
]
