"""Deep Q-learning with a target network, optionally fed by prioritised replay."""

from __future__ import annotations

import numpy as np

from ..replay import PrioritizedReplayBuffer, ReplayBuffer, Transition
from .base import Agent
from .core import resolve, select_action
from .mlp import MlpSpec, backward, copy_params, forward_cached, hidden_layers_for, init_params, make_optimizer
from .schedules import epsilon_at


def _stack(batch, n_actions):
    S = np.stack([tr.s for tr in batch])
    A = np.array([tr.a for tr in batch], dtype=int) - 1
    R = np.array([tr.r for tr in batch], dtype=float)
    S2 = np.stack([tr.s_next for tr in batch])
    D = np.array([tr.d for tr in batch], dtype=float)
    M2 = np.stack([tr.next_mask if tr.next_mask is not None else np.ones(n_actions, dtype=bool)
                   for tr in batch])
    return S, A, R, S2, D, M2


def td_errors(params, target_params, batch, gamma):
    """delta_i = r_i + gamma * (1 - d_i) * max_a' Q_target(s'_i, a') - Q(s_i, a_i).

    The max runs over the actions legal in s'_i when a mask was recorded.
    Returns ``(delta, action_columns, activations)`` so callers can backpropagate.
    """
    n_actions = params[-1][0].shape[1]
    S, A, R, S2, D, M2 = _stack(batch, n_actions)
    q_all, acts = forward_cached(params, S)
    q_sa = q_all[np.arange(len(batch)), A]
    bootstrap = np.zeros(len(batch))
    live = D < 0.5
    if live.any():
        q_next, _ = forward_cached(target_params, S2[live])
        masked = np.where(M2[live], q_next, -np.inf)
        best = masked.max(axis=1)
        bootstrap[live] = np.where(np.isfinite(best), best, 0.0)
    delta = R + gamma * bootstrap - q_sa
    return delta, A, acts


def dql_loss_and_grads(params, target_params, batch, gamma, weights=None, loss="mse"):
    delta, A, acts = td_errors(params, target_params, batch, gamma)
    n = len(batch)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if loss == "huber":
        absd = np.abs(delta)
        per = np.where(absd <= 1.0, 0.5 * delta ** 2, absd - 0.5)
        dldq = -w * np.clip(delta, -1.0, 1.0) / n
    else:
        per = delta ** 2
        dldq = -2.0 * w * delta / n
    value = float(np.mean(w * per))
    grad_out = np.zeros((n, params[-1][0].shape[1]))
    grad_out[np.arange(n), A] = dldq
    grads = backward(params, acts, grad_out)
    return value, grads, delta


def dql_train_step(params, target_params, batch, gamma, optimizer, weights=None, loss="mse"):
    """One gradient step on the (importance-weighted) TD loss.

    Returns ``(new_params, td_errors, mean_loss)``; terminal transitions never
    read ``target_params``.
    """
    value, grads, delta = dql_loss_and_grads(params, target_params, batch, gamma, weights, loss)
    return optimizer.step(params, grads), delta, value


def target_sync(params, target_params, episode, sync_every):
    if sync_every < 1:
        raise ValueError("sync_every must be >= 1")
    if episode % sync_every == 0:
        return copy_params(params)
    return target_params


def q_network_spec(n_in, n_actions, n_nodes, config, seed):
    depth = config.hidden_layers or hidden_layers_for(n_nodes)
    return MlpSpec((n_in,) + (config.hidden_width,) * depth + (n_actions,), seed)


class DQLAgent(Agent):
    learns = True

    def __init__(self, n_in, n_actions, config, seed=0, n_nodes=0):
        self.config = config
        self.n_actions = n_actions
        self.kind = "dql-per" if config.per_enabled else "dql"
        self.spec = q_network_spec(n_in, n_actions, n_nodes, config, seed)
        self.params = init_params(self.spec)
        self.target_params = copy_params(self.params)
        self.optimizer = make_optimizer(config.optimizer, config.learning_rate)
        if config.per_enabled:
            self.buffer = PrioritizedReplayBuffer(config.buffer_capacity)
        else:
            self.buffer = ReplayBuffer(config.buffer_capacity)
        self.rng = np.random.default_rng([seed, 17])
        self.total_steps = 0
        self.batches = 0
        self.episode = 0

    def q_values(self, features):
        out, _ = forward_cached(self.params, features)
        return out

    def act(self, observation, actions, mask, features):
        eps = epsilon_at(self.config.schedule, self.total_steps)
        scores = self.q_values(features)
        index = select_action(scores, mask, eps, self.rng)
        return resolve(actions, index, self.rng), index, {"epsilon": eps, "scores": scores}

    def record(self, features, index, reward, next_features, done, next_mask, key, info):
        self.buffer.push(Transition(features, index, float(reward), next_features, int(done),
                                    next_mask, key))
        self.total_steps += 1

    def step_updates(self):
        cfg = self.config
        if len(self.buffer) < cfg.batch_size or self.total_steps % cfg.train_every:
            return []
        if cfg.per_enabled:
            idx, batch, weights = self.buffer.sample_prioritized(cfg.batch_size, cfg.per, self.rng)
        else:
            idx, weights = None, None
            batch = self.buffer.sample_uniform(cfg.batch_size, self.rng)
        self.params, delta, loss = dql_train_step(
            self.params, self.target_params, batch, cfg.gamma, self.optimizer, weights, cfg.loss)
        if cfg.per_enabled:
            self.buffer.update_priorities(idx, delta, cfg.per.eps0)
        self.batches += 1
        return [{
            "batch": self.batches,
            "loss": loss,
            "deltas": delta,
            "rewards": np.array([tr.r for tr in batch]),
            "keys": [tr.key for tr in batch],
        }]

    def end_episode(self, episode):
        self.target_params = target_sync(self.params, self.target_params, episode,
                                         self.config.target_sync_every)
        return []

    def action_values(self, features, key):
        return self.q_values(features)


class ExploitingAgent(Agent):
    """Greedy execution of frozen Q-network parameters: no replay, no updates."""

    kind = "exploit"

    def __init__(self, params, seed=0):
        self.params = copy_params(params)
        self.seed = seed
        self.rng = np.random.default_rng([seed, 19])
        self.tried = set()

    def begin_episode(self, episode):
        # Reseeded per episode so a frozen rollout depends only on (seed, episode).
        self.rng = np.random.default_rng([self.seed, 19, episode])
        self.tried = set()

    def act(self, observation, actions, mask, features):
        scores, _ = forward_cached(self.params, features)
        # Without exploration noise a greedy pick can loop on an exhausted index forever.
        fresh = np.zeros_like(mask)
        for a in actions:
            if a not in self.tried:
                fresh[a.index - 1] = True
        fresh &= mask
        index = select_action(scores, fresh if fresh.any() else mask, 0.0, self.rng)
        action = resolve(actions, index, self.rng)
        self.tried.add(action)
        return action, index, {"epsilon": 0.0, "scores": scores}

    def action_values(self, features, key):
        return forward_cached(self.params, features)[0]


def exploiting_policy(params, seed=0):
    return ExploitingAgent(params, seed)
