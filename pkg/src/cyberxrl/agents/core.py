"""Shared decision rules: epsilon-greedy selection, the Q-learning update, masked softmax."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidArgument, NoLegalAction


def select_action(scores, legal, epsilon, rng):
    """Epsilon-greedy choice over legal actions; returns a 1-based index.

    Greedy ties resolve to the lowest index. ``rng`` is always consulted once
    for the exploration coin so runs stay aligned regardless of the outcome.
    """
    legal = np.asarray(legal, dtype=bool)
    candidates = np.flatnonzero(legal)
    if candidates.size == 0:
        raise NoLegalAction("no legal action available")
    if rng.random() < epsilon:
        return int(candidates[rng.integers(candidates.size)]) + 1
    scores = np.asarray(scores, dtype=float)
    masked = np.where(legal, scores, -np.inf)
    return int(np.argmax(masked)) + 1


def q_update(q, r, gamma, max_next, alpha):
    if not 0.0 < alpha <= 1.0:
        raise InvalidArgument("alpha must be in (0, 1]")
    return q + alpha * (r + gamma * max_next - q)


def masked_log_softmax(logits, mask):
    z = np.where(mask, logits, -np.inf)
    zmax = z.max(axis=-1, keepdims=True)
    shifted = z - zmax
    lse = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    return np.where(mask, shifted - lse, -np.inf)


def masked_softmax(logits, mask):
    return np.where(mask, np.exp(masked_log_softmax(logits, mask)), 0.0)


def untried_first(actions, tried):
    """Drop triples already executed this episode, unless that would empty their ladder index.

    Steps are deterministic, so repeating a triple can never reveal anything new.
    """
    fresh = {a.index for a in actions if a not in tried}
    return [a for a in actions if a not in tried or a.index not in fresh]


def resolve(actions, index, rng):
    """Pick one concrete (index, source, target) triple for a chosen ladder index."""
    matching = [a for a in actions if a.index == index]
    if not matching:
        raise NoLegalAction(f"no legal triple for action index {index}")
    if len(matching) == 1:
        return matching[0]
    return matching[int(rng.integers(len(matching)))]
