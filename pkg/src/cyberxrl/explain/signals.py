"""Explainability signals computed from run traces or raw arrays.

Every function here is pure: same inputs, same outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..agents.schedules import epsilon_at
from ..errors import InvalidArgument

EARLY = "Early"
LATE = "Late"
COLLAPSE = "Collapse"
LOCK_IN = "LockIn"

DEFAULT_PHASE_THRESHOLD = 0.5
DEFAULT_REWARD_FILTER = 2.0
DEFAULT_LOCK_IN_K = 5
DEFAULT_ENTROPY_THRESHOLD = 0.1
DEFAULT_MARGIN_FACTOR = 5.0
DEFAULT_WARNING_WINDOW = 5


@dataclass(frozen=True)
class PhaseLabel:
    phase: str
    threshold: float


@dataclass(frozen=True)
class QValueSnapshot:
    episode: int
    means: tuple
    dominant: int


@dataclass(frozen=True)
class PriorityStat:
    batch: int
    mean_abs_delta: float
    high_priority_count: int
    episode: int = 0


@dataclass(frozen=True)
class ConfidenceSignal:
    episode: int
    entropy: float
    margin: float
    dominant: int | None = None


@dataclass(frozen=True)
class Alert:
    kind: str
    onset: int
    evidence: dict = field(default_factory=dict)

    def to_dict(self):
        return {"kind": self.kind, "onset": self.onset, "evidence": dict(self.evidence)}


def _unit(x, name):
    if not 0.0 <= x <= 1.0:
        raise InvalidArgument(f"{name} must be in [0, 1], got {x}")


def label_phase(c, threshold=DEFAULT_PHASE_THRESHOLD):
    _unit(c, "compromise ratio")
    _unit(threshold, "threshold")
    return PhaseLabel(EARLY if c < threshold else LATE, threshold)


def phase_reward_curves(trace, threshold=DEFAULT_PHASE_THRESHOLD):
    """Split step rewards by the phase of the step and accumulate each part.

    Returns ``{"Early": [...], "Late": [...]}``.
    """
    curves = {EARLY: [], LATE: []}
    totals = {EARLY: 0.0, LATE: 0.0}
    for phase, reward in step_phases(trace, threshold):
        totals[phase] += reward
        curves[phase].append(totals[phase])
    return curves


def step_phases(trace, threshold=DEFAULT_PHASE_THRESHOLD):
    """``(phase, reward)`` per step, phased by the ratio in force when the action was chosen."""
    return [(label_phase(e["ratio_before"], threshold).phase, float(e["reward"])) for e in trace.steps]


def phase_mean_rewards(trace, threshold=DEFAULT_PHASE_THRESHOLD):
    """Mean per-step reward in each phase (``nan`` for an empty phase)."""
    sums = {EARLY: [], LATE: []}
    for phase, reward in step_phases(trace, threshold):
        sums[phase].append(reward)
    return {k: (float(np.mean(v)) if v else float("nan")) for k, v in sums.items()}


def aggregate_action_values(states, value_fn, episode=0):
    """Mean of ``value_fn(state)`` over the given states, per action."""
    states = list(states)
    if not states:
        raise InvalidArgument("need at least one state to aggregate")
    rows = np.array([np.asarray(value_fn(s), dtype=float) for s in states])
    means = rows.mean(axis=0)
    return QValueSnapshot(episode, tuple(float(m) for m in means), int(np.argmax(means)) + 1)


def record_priority_stats(deltas, rewards, keys, reward_filter=DEFAULT_REWARD_FILTER, batch=0, episode=0):
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size == 0:
        raise InvalidArgument("empty batch")
    rewards = np.asarray(rewards, dtype=float)
    high = {k for k, r in zip(keys, rewards) if r > reward_filter}
    return PriorityStat(batch, float(np.abs(deltas).mean()), len(high), episode)


def normalized_entropy(probs):
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise InvalidArgument("probs must be a non-negative vector summing to 1")
    if p.size == 1:
        return 0.0
    nz = p[p > 0]
    h = float(-(nz * np.log(nz)).sum() / np.log(p.size))
    return min(max(h, 0.0), 1.0)


def logit_margin(logits):
    z = np.asarray(logits, dtype=float)
    if z.ndim != 1 or z.size < 2:
        raise InvalidArgument("need at least two logits")
    top = np.sort(z)[-2:]
    return float(top[1] - top[0])


def dominant_action(distributions):
    d = np.asarray(distributions, dtype=float)
    if d.ndim == 1:
        d = d[None, :]
    if d.shape[0] == 0:
        raise InvalidArgument("need at least one distribution")
    return int(np.argmax(d.mean(axis=0))) + 1


def confidence_signal(episode, probs_seq, logits_seq):
    """Episode-level entropy of the mean policy, margin of the mean logits, dominant action."""
    mean_p = np.asarray(probs_seq, dtype=float).mean(axis=0)
    mean_p = mean_p / mean_p.sum()
    return ConfidenceSignal(
        episode,
        normalized_entropy(mean_p),
        logit_margin(np.asarray(logits_seq, dtype=float).mean(axis=0)),
        dominant_action(probs_seq),
    )


def detect_lock_in(dominants, k=DEFAULT_LOCK_IN_K, first_episode=1):
    """Earliest episode starting a run of ``k`` identical dominant actions."""
    if k < 2:
        raise InvalidArgument("k must be >= 2")
    seq = list(dominants)
    for start in range(len(seq) - k + 1):
        window = seq[start:start + k]
        if all(a == window[0] for a in window):
            end = start + k
            while end < len(seq) and seq[end] == window[0]:
                end += 1
            return Alert(LOCK_IN, start + first_episode, {"action": int(window[0]), "duration": end - start, "k": k})
    return None


def default_margin_threshold(margins, factor=DEFAULT_MARGIN_FACTOR):
    """``factor`` times the median of the episode-1 margins (a scalar counts as one sample)."""
    base = float(np.median(np.atleast_1d(np.asarray(margins, dtype=float))))
    return factor * base


def detect_collapse(entropy, margin, reward, entropy_threshold=DEFAULT_ENTROPY_THRESHOLD,
                    margin_threshold=None, window=DEFAULT_WARNING_WINDOW, first_episode=1):
    """Earliest episode where entropy is below and margin above their thresholds.

    ``evidence["early_warning"]`` is true when reward at onset is no lower
    than ``window`` episodes earlier, i.e. confidence hardened before any
    drop in return.
    """
    entropy = np.asarray(entropy, dtype=float)
    margin = np.asarray(margin, dtype=float)
    reward = np.asarray(reward, dtype=float)
    if not (len(entropy) == len(margin) == len(reward)):
        raise InvalidArgument("entropy, margin and reward series must have equal length")
    if len(entropy) < 2:
        raise InvalidArgument("need at least two episodes")
    if margin_threshold is None:
        margin_threshold = default_margin_threshold(margin[0])
    hits = np.flatnonzero((entropy < entropy_threshold) & (margin > margin_threshold))
    if hits.size == 0:
        return None
    i = int(hits[0])
    j = max(0, i - window)
    return Alert(COLLAPSE, i + first_episode, {
        "entropy": float(entropy[i]),
        "margin": float(margin[i]),
        "entropy_threshold": float(entropy_threshold),
        "margin_threshold": float(margin_threshold),
        "early_warning": bool(reward[i] >= reward[j]),
    })


def epsilon_trace(schedule, horizon):
    if horizon < 1:
        raise InvalidArgument("horizon must be >= 1")
    return [(t, epsilon_at(schedule, t)) for t in range(horizon)]


def discovery_curve(trace, entry_count=1):
    """Distinct nodes discovered so far in the run, per global step."""
    seen = set()
    out = []
    for e in trace.steps:
        seen.update(e.get("discovered", ()))
        out.append((e["global_step"], entry_count + len(seen)))
    return out


def reward_curve(trace):
    return [(e["episode"], e["cumulative_reward"]) for e in trace.episodes]
