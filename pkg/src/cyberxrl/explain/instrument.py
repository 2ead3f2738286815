"""Training-time instrumentation: turns loop callbacks into trace events."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..agents.loop import Hooks
from ..errors import InvalidArgument
from ..trace.events import BATCH, EPISODE_END, EXPLAIN, STEP
from . import signals as sig


@dataclass(frozen=True)
class ExplainConfig:
    phase_threshold: float = sig.DEFAULT_PHASE_THRESHOLD
    reward_filter: float = sig.DEFAULT_REWARD_FILTER
    lock_in_k: int = sig.DEFAULT_LOCK_IN_K
    entropy_threshold: float = sig.DEFAULT_ENTROPY_THRESHOLD
    margin_threshold: float | None = None
    margin_factor: float = sig.DEFAULT_MARGIN_FACTOR
    warning_window: int = sig.DEFAULT_WARNING_WINDOW
    aggregation: str = "distinct"

    def __post_init__(self):
        if self.aggregation not in ("distinct", "all"):
            raise InvalidArgument("aggregation must be 'distinct' or 'all'")
        if not 0.0 <= self.phase_threshold <= 1.0:
            raise InvalidArgument("phase threshold must be in [0, 1]")
        if self.lock_in_k < 2:
            raise InvalidArgument("lock-in window must be >= 2")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def compute_alerts(trace, cfg=ExplainConfig()):
    """Lock-in and collapse alerts from a trace's per-episode Explain records."""
    alerts = []
    conf = trace.explain("confidence")
    dominant_source = conf or trace.explain("q_snapshot")
    if dominant_source:
        first = dominant_source[0]["episode"]
        alert = sig.detect_lock_in([e["dominant"] for e in dominant_source], cfg.lock_in_k, first)
        if alert:
            alerts.append(alert)
    if len(conf) >= 2:
        rewards = {e["episode"]: e["cumulative_reward"] for e in trace.episodes}
        margin_threshold = cfg.margin_threshold
        if margin_threshold is None:
            margin_threshold = cfg.margin_factor * conf[0].get("margin_median", conf[0]["margin"])
        alert = sig.detect_collapse(
            [e["entropy"] for e in conf], [e["margin"] for e in conf],
            [rewards.get(e["episode"], 0.0) for e in conf],
            cfg.entropy_threshold, margin_threshold, cfg.warning_window, conf[0]["episode"])
        if alert:
            alerts.append(alert)
    return alerts


class TraceHook(Hooks):
    """Writes Step, Batch, Explain and EpisodeEnd events for one run."""

    def __init__(self, writer, agent, cfg=ExplainConfig()):
        self.writer = writer
        self.agent = agent
        self.cfg = cfg
        self._visited = {}
        self._all_states = []
        self._probs = []
        self._logits = []

    def on_step(self, rec):
        payload = dict(
            episode=rec.episode, step=rec.step, global_step=rec.global_step,
            action=rec.action.to_list(), index=rec.index, reward=rec.reward,
            cumulative_reward=rec.cumulative_reward, ratio=rec.ratio, ratio_before=rec.ratio_before,
            phase=sig.label_phase(rec.ratio_before, self.cfg.phase_threshold).phase,
            discovered=list(rec.new_discovered), owned=list(rec.new_owned),
            discovered_count=rec.discovered_count, done=rec.done,
        )
        if rec.epsilon is not None:
            payload["epsilon"] = rec.epsilon
        if rec.probs is not None:
            payload["probs"] = rec.probs
            payload["logits"] = rec.logits
            self._probs.append(np.asarray(rec.probs))
            self._logits.append(np.asarray(rec.logits))
        self.writer.append(STEP, **payload)
        if rec.features is not None:
            self._visited.setdefault(rec.key, rec.features)
            self._all_states.append((rec.key, rec.features))

    def on_batch(self, rec):
        payload = dict(episode=rec.episode, batch=rec.batch, loss=rec.loss)
        if rec.deltas is not None:
            stat = sig.record_priority_stats(rec.deltas, rec.rewards, rec.keys,
                                             self.cfg.reward_filter, rec.batch, rec.episode)
            payload.update(mean_abs_delta=stat.mean_abs_delta,
                           high_priority_count=stat.high_priority_count,
                           reward_filter=self.cfg.reward_filter)
        payload.update({k: v for k, v in rec.extra.items() if np.isscalar(v)})
        self.writer.append(BATCH, **payload)

    def on_episode_end(self, summary):
        ep = summary.episode
        states = list(self._visited.items()) if self.cfg.aggregation == "distinct" else self._all_states
        if states and self.agent.action_values(states[0][1], states[0][0]) is not None:
            snap = sig.aggregate_action_values(
                states, lambda s: self.agent.action_values(s[1], s[0]), ep)
            self.writer.append(EXPLAIN, signal="q_snapshot", episode=ep,
                               means=list(snap.means), dominant=snap.dominant, states=len(states))
        if self._probs:
            conf = sig.confidence_signal(ep, self._probs, self._logits)
            step_margins = [sig.logit_margin(z) for z in self._logits]
            self.writer.append(EXPLAIN, signal="confidence", episode=ep, entropy=conf.entropy,
                               margin=conf.margin, dominant=conf.dominant,
                               margin_median=float(np.median(step_margins)))
        self.writer.append(EPISODE_END, **asdict(summary))
        self._visited, self._all_states, self._probs, self._logits = {}, [], [], []

    def finish(self, trace):
        for alert in compute_alerts(trace, self.cfg):
            self.writer.append(EXPLAIN, signal="alert", alert=alert.kind, onset=alert.onset,
                               evidence=alert.evidence)
