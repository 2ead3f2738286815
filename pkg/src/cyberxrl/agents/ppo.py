"""Clipped-surrogate policy gradient with a learned value baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgument
from .base import Agent
from .core import masked_log_softmax, masked_softmax, resolve
from .mlp import MlpSpec, backward, copy_params, forward_cached, hidden_layers_for, init_params, make_optimizer


@dataclass
class RolloutStep:
    features: np.ndarray
    mask: np.ndarray
    index: int
    reward: float
    logits: np.ndarray


def discounted_returns(rewards, gamma):
    out = np.zeros(len(rewards))
    running = 0.0
    for i in range(len(rewards) - 1, -1, -1):
        running = rewards[i] + gamma * running
        out[i] = running
    return out


def _entropy_terms(logp, probs, mask):
    plogp = np.where(mask, probs * np.where(mask, logp, 0.0), 0.0)
    H = -plogp.sum(axis=1)
    # dH/dz_j = -p_j (log p_j + H)
    dH = np.where(mask, -probs * (np.where(mask, logp, 0.0) + H[:, None]), 0.0)
    return H, dH


def surrogate_and_grads(params, states, masks, actions, old_logp, advantages, clip, entropy_coef):
    """Objective J = mean(min(rho*A, clip(rho)*A)) + c * mean(H) and dJ/dparams."""
    n = len(actions)
    logits, acts = forward_cached(params, states)
    logp = masked_log_softmax(logits, masks)
    probs = np.exp(np.where(masks, logp, -np.inf))
    rows = np.arange(n)
    ratio = np.exp(logp[rows, actions] - old_logp)
    clipped = np.clip(ratio, 1.0 - clip, 1.0 + clip)
    surr = np.minimum(ratio * advantages, clipped * advantages)
    H, dH = _entropy_terms(logp, probs, masks)
    value = float(surr.mean() + entropy_coef * H.mean())

    active = ~(((advantages > 0) & (ratio > 1.0 + clip)) | ((advantages < 0) & (ratio < 1.0 - clip)))
    onehot = np.zeros_like(probs)
    onehot[rows, actions] = 1.0
    coef = np.where(active, advantages * ratio, 0.0)
    dJ = coef[:, None] * (onehot - probs) + entropy_coef * dH
    grads = backward(params, acts, dJ / n)
    return value, grads, {"ratio": ratio, "entropy": H, "logits": logits, "probs": probs}


def value_loss_and_grads(params, states, returns):
    v, acts = forward_cached(params, states)
    err = v[:, 0] - returns
    grad = (2.0 * err / len(returns))[:, None]
    return float(np.mean(err ** 2)), backward(params, acts, grad)


def pg_update(policy_params, value_params, rollout, gamma, clip, entropy_coef,
              policy_opt, value_opt, epochs=4):
    """Run ``epochs`` clipped-surrogate ascent steps plus value regression.

    Advantages (return minus baseline) are computed once, before any update,
    and are not normalised. Returns ``(policy_params, value_params, diag)``.
    """
    if not rollout:
        raise InvalidArgument("rollout must be non-empty")
    states = np.stack([s.features for s in rollout])
    masks = np.stack([s.mask for s in rollout]).astype(bool)
    actions = np.array([s.index for s in rollout]) - 1
    old_logits = np.stack([s.logits for s in rollout])
    rows = np.arange(len(rollout))
    old_logp = masked_log_softmax(old_logits, masks)[rows, actions]
    returns = discounted_returns([s.reward for s in rollout], gamma)
    baseline, _ = forward_cached(value_params, states)
    advantages = returns - baseline[:, 0]

    diag = {}
    for _ in range(epochs):
        objective, grads, diag = surrogate_and_grads(
            policy_params, states, masks, actions, old_logp, advantages, clip, entropy_coef)
        policy_params = policy_opt.step(policy_params, [(-gW, -gb) for gW, gb in grads])
        vloss, vgrads = value_loss_and_grads(value_params, states, returns)
        value_params = value_opt.step(value_params, vgrads)
    n_actions = masks.shape[1]
    return policy_params, value_params, {
        "objective": objective,
        "value_loss": vloss,
        "mean_ratio": float(diag["ratio"].mean()),
        "entropy": float(diag["entropy"].mean() / np.log(n_actions)) if n_actions > 1 else 0.0,
        "logits": diag["logits"].mean(axis=0),
        "returns": returns,
        "advantages": advantages,
    }


class PPOAgent(Agent):
    kind = "pg"
    learns = True

    def __init__(self, n_in, n_actions, config, seed=0, n_nodes=0):
        self.config = config
        self.n_actions = n_actions
        depth = config.hidden_layers or hidden_layers_for(n_nodes)
        hidden = (config.hidden_width,) * depth
        self.policy_params = init_params(MlpSpec((n_in,) + hidden + (n_actions,), seed))
        self.value_params = init_params(MlpSpec((n_in,) + hidden + (1,), seed + 1))
        self.policy_opt = make_optimizer(config.optimizer, config.pg_learning_rate)
        self.value_opt = make_optimizer(config.optimizer, config.pg_learning_rate)
        self.entropy_coef = config.entropy_coef
        self.rng = np.random.default_rng([seed, 23])
        self.rollout = []
        self.batches = 0

    @property
    def params(self):
        return self.policy_params

    def act(self, observation, actions, mask, features):
        logits, _ = forward_cached(self.policy_params, features)
        probs = masked_softmax(logits, mask)
        probs = probs / probs.sum()
        index = int(self.rng.choice(self.n_actions, p=probs)) + 1
        return resolve(actions, index, self.rng), index, {"probs": probs, "logits": logits}

    def record(self, features, index, reward, next_features, done, next_mask, key, info):
        self.rollout.append(RolloutStep(features, np.asarray(info["mask"], dtype=bool), index,
                                        float(reward), info["logits"]))

    def end_episode(self, episode):
        if not self.rollout:
            return []
        cfg = self.config
        self.policy_params, self.value_params, diag = pg_update(
            self.policy_params, self.value_params, self.rollout, cfg.gamma, cfg.clip,
            self.entropy_coef, self.policy_opt, self.value_opt, cfg.pg_epochs)
        self.rollout = []
        self.entropy_coef *= cfg.entropy_decay
        self.batches += 1
        return [{
            "batch": self.batches,
            "loss": diag["value_loss"],
            "mean_ratio": diag["mean_ratio"],
            "entropy": diag["entropy"],
        }]

    def action_values(self, features, key):
        return forward_cached(self.policy_params, features)[0]

    def snapshot(self):
        return copy_params(self.policy_params)
