"""Agent protocol shared by the training loop, plus the random baseline."""

from __future__ import annotations

import numpy as np

from .core import resolve, select_action


class Agent:
    """Minimal interface driven by :func:`cyberxrl.agents.loop.run_episode`.

    ``act`` returns the concrete action, its ladder index and a dict of
    diagnostics (``epsilon``, ``scores`` or ``probs``/``logits``).
    ``record`` stores the outcome; ``step_updates`` and ``end_episode``
    return a list of batch-update records (possibly empty).
    """

    kind = "agent"
    learns = False

    def begin_episode(self, episode):
        pass

    def act(self, observation, actions, mask, features):
        raise NotImplementedError

    def record(self, features, index, reward, next_features, done, next_mask, key, info):
        pass

    def step_updates(self):
        return []

    def end_episode(self, episode):
        return []

    def action_values(self, features, key):
        """Per-action scores for a state, or ``None`` if the agent has none."""
        return None


class RandomAgent(Agent):
    kind = "random"

    def __init__(self, n_actions, seed=0):
        self.n_actions = n_actions
        self.rng = np.random.default_rng([seed, 11])

    def act(self, observation, actions, mask, features):
        index = select_action(np.zeros(self.n_actions), mask, 1.0, self.rng)
        return resolve(actions, index, self.rng), index, {"epsilon": 1.0}
