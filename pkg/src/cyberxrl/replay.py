"""Experience replay: a FIFO ring buffer and a proportional prioritised variant."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyBuffer, InvalidArgument


@dataclass
class Transition:
    s: np.ndarray
    a: int
    r: float
    s_next: np.ndarray
    d: int
    next_mask: np.ndarray | None = None
    key: str | None = None
    priority: float = 0.0


@dataclass(frozen=True)
class PERConfig:
    alpha: float = 0.6
    beta: float = 0.7
    eps0: float = 0.01

    def __post_init__(self):
        if self.alpha < 0 or not 0 <= self.beta <= 1 or self.eps0 <= 0:
            raise InvalidArgument(f"invalid PER config {self}")


class ReplayBuffer:
    def __init__(self, capacity=20000):
        if capacity < 1:
            raise InvalidArgument("capacity must be >= 1")
        self.capacity = int(capacity)
        self._data = []
        self._next = 0

    def __len__(self):
        return len(self._data)

    def __getitem__(self, i):
        return self._data[i]

    def oldest_first(self):
        """Stored transitions in insertion order."""
        if len(self._data) < self.capacity:
            return list(self._data)
        return self._data[self._next:] + self._data[:self._next]

    def push(self, transition):
        if len(self._data) < self.capacity:
            self._data.append(transition)
            slot = len(self._data) - 1
        else:
            slot = self._next
            self._data[slot] = transition
        self._next = (slot + 1) % self.capacity
        return slot

    def sample_uniform(self, k, rng):
        if not self._data:
            raise EmptyBuffer("cannot sample from an empty buffer")
        idx = rng.integers(0, len(self._data), size=k)
        return [self._data[i] for i in idx]


class PrioritizedReplayBuffer(ReplayBuffer):
    """Proportional prioritisation with a linear scan over priorities.

    New transitions enter at the current maximum priority (1.0 when empty) so
    that each is replayed at least once with high probability.
    """

    def __init__(self, capacity=20000):
        super().__init__(capacity)
        self.priorities = np.zeros(self.capacity)

    def push(self, transition):
        n = len(self._data)
        p = float(self.priorities[:n].max()) if n else 1.0
        slot = super().push(transition)
        transition.priority = p
        self.priorities[slot] = p
        return slot

    def probabilities(self, alpha):
        n = len(self._data)
        if n == 0:
            raise EmptyBuffer("cannot sample from an empty buffer")
        scaled = self.priorities[:n] ** alpha
        return scaled / scaled.sum()

    def sample_prioritized(self, k, cfg, rng):
        if k < 1:
            raise InvalidArgument("batch size must be >= 1")
        probs = self.probabilities(cfg.alpha)
        n = len(probs)
        idx = rng.choice(n, size=k, p=probs)
        weights = (n * probs[idx]) ** (-cfg.beta)
        weights = weights / weights.max()
        return idx, [self._data[i] for i in idx], weights

    def update_priorities(self, indices, deltas, eps0):
        n = len(self._data)
        for i, delta in zip(indices, deltas):
            if not 0 <= i < n:
                raise InvalidArgument(f"index {i} out of range for buffer of size {n}")
            p = priority_of(delta, eps0)
            self.priorities[i] = p
            self._data[i].priority = p


def priority_of(delta, eps0):
    if eps0 <= 0:
        raise InvalidArgument("eps0 must be positive")
    return abs(float(delta)) + eps0


def push(buffer, transition):
    buffer.push(transition)


def sample_uniform(buffer, k, rng):
    return buffer.sample_uniform(k, rng)


def sample_prioritized(buffer, k, cfg, rng):
    return buffer.sample_prioritized(k, cfg, rng)


def update_priorities(buffer, indices, deltas, eps0):
    buffer.update_priorities(indices, deltas, eps0)


def sampling_probabilities(priorities, alpha):
    """P(i) = p_i^alpha / sum_j p_j^alpha for a raw priority vector."""
    scaled = np.asarray(priorities, dtype=float) ** alpha
    return scaled / scaled.sum()


__all__ = [
    "Transition", "PERConfig", "ReplayBuffer", "PrioritizedReplayBuffer", "priority_of", "push",
    "sample_uniform", "sample_prioritized", "update_priorities", "sampling_probabilities",
]
