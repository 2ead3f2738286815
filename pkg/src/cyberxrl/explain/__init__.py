"""Strategic and tactical explainability signals."""

from .instrument import ExplainConfig, TraceHook, compute_alerts
from .signals import (
    COLLAPSE, EARLY, LATE, LOCK_IN, Alert, ConfidenceSignal, PhaseLabel, PriorityStat, QValueSnapshot,
    aggregate_action_values, confidence_signal, detect_collapse, detect_lock_in, discovery_curve,
    dominant_action, epsilon_trace, label_phase, logit_margin, normalized_entropy, phase_mean_rewards,
    phase_reward_curves, record_priority_stats, reward_curve,
)
