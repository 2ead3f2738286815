"""Tabular Q-learning over canonical state keys."""

from __future__ import annotations

import numpy as np

from ..env.sim import observation_key
from .base import Agent
from .core import q_update, resolve, select_action
from .schedules import epsilon_at


class TabularQ:
    """Sparse (state-key, action) -> value table; unseen entries read as 0."""

    def __init__(self):
        self.table = {}

    def get(self, key, action):
        return self.table.get((key, action), 0.0)

    def set(self, key, action, value):
        self.table[(key, action)] = value

    def values(self, key, n_actions):
        return np.array([self.get(key, a) for a in range(1, n_actions + 1)])

    def max_over(self, key, actions):
        actions = list(actions)
        if not actions:
            return 0.0
        return max(self.get(key, a) for a in actions)

    def update(self, key, action, reward, gamma, max_next, alpha):
        new = q_update(self.get(key, action), reward, gamma, max_next, alpha)
        self.set(key, action, new)
        return new

    def __len__(self):
        return len(self.table)


class TabularAgent(Agent):
    kind = "tabular"
    learns = True

    def __init__(self, n_actions, config, seed=0):
        self.n_actions = n_actions
        self.config = config
        self.q = TabularQ()
        self.rng = np.random.default_rng([seed, 13])
        self.total_steps = 0
        self._key = None

    def act(self, observation, actions, mask, features):
        self._key = observation_key(observation)
        eps = epsilon_at(self.config.schedule, self.total_steps)
        scores = self.q.values(self._key, self.n_actions)
        index = select_action(scores, mask, eps, self.rng)
        return resolve(actions, index, self.rng), index, {"epsilon": eps, "scores": scores}

    def record(self, features, index, reward, next_features, done, next_mask, key, info):
        next_key = info["next_key"]
        max_next = 0.0 if done else self.q.max_over(next_key, np.flatnonzero(next_mask) + 1)
        self.q.update(self._key, index, reward, self.config.gamma, max_next, self.config.tabular_lr)
        self.total_steps += 1

    def action_values(self, features, key):
        return self.q.values(key, self.n_actions)
