import numpy as np
import pytest

from cyberxrl.errors import EmptyBuffer, InvalidArgument
from cyberxrl.replay import (
    PERConfig, PrioritizedReplayBuffer, ReplayBuffer, Transition, priority_of, sampling_probabilities,
)


def tr(i, r=0.0):
    return Transition(np.array([float(i)]), 1, r, np.array([float(i)]), 0, key=f"s{i}")


def filled(priorities):
    buf = PrioritizedReplayBuffer(len(priorities))
    for i, _ in enumerate(priorities):
        buf.push(tr(i))
    buf.update_priorities(range(len(priorities)), [p - 0.01 for p in priorities], 0.01)
    return buf


def test_ring_evicts_oldest():
    buf = ReplayBuffer(2)
    for i in range(3):
        buf.push(tr(i))
    assert len(buf) == 2
    assert [t.s[0] for t in buf.oldest_first()] == [1.0, 2.0]


def test_fifo_never_exceeds_capacity():
    buf = ReplayBuffer(5)
    for i in range(23):
        buf.push(tr(i))
        assert len(buf) <= 5
    assert [t.s[0] for t in buf.oldest_first()] == [18.0, 19.0, 20.0, 21.0, 22.0]


def test_new_item_enters_at_max_priority():
    buf = PrioritizedReplayBuffer(10)
    buf.push(tr(0))
    assert buf.priorities[0] == 1.0
    buf.push(tr(1))
    buf.update_priorities([0, 1], [2.99, 0.0], 0.01)
    buf.push(tr(2))
    assert buf.priorities[2] == pytest.approx(3.0)


def test_priority_of():
    assert priority_of(0.0, 0.01) == pytest.approx(0.01, abs=1e-12)
    assert priority_of(-3.0, 0.01) == pytest.approx(3.01, abs=1e-12)
    with pytest.raises(InvalidArgument):
        priority_of(1.0, 0.0)


def test_two_transition_probabilities():
    p = sampling_probabilities([0.01, 0.99], 0.6)
    expected = np.array([0.01 ** 0.6, 0.99 ** 0.6]) / (0.01 ** 0.6 + 0.99 ** 0.6)
    assert np.allclose(p, expected, atol=1e-12)
    assert p == pytest.approx([0.0597, 0.9403], abs=5e-5)


def test_alpha_zero_is_uniform():
    assert np.allclose(sampling_probabilities([0.01, 5.0, 0.3], 0.0), 1 / 3, atol=1e-12)


def test_sampling_requires_data():
    rng = np.random.default_rng(0)
    with pytest.raises(EmptyBuffer):
        ReplayBuffer(3).sample_uniform(1, rng)
    with pytest.raises(EmptyBuffer):
        PrioritizedReplayBuffer(3).sample_prioritized(1, PERConfig(), rng)


def test_buffer_of_one_always_returns_it():
    buf = ReplayBuffer(4)
    buf.push(tr(7))
    assert all(t.s[0] == 7.0 for t in buf.sample_uniform(20, np.random.default_rng(0)))


def _within_3_sigma(counts, probs, n):
    sigma = np.sqrt(n * probs * (1 - probs))
    return np.all(np.abs(counts - n * probs) <= 3 * sigma + 1e-9)


def test_uniform_frequencies():
    buf = ReplayBuffer(10)
    for i in range(10):
        buf.push(tr(i))
    n = 100_000
    draws = buf.sample_uniform(n, np.random.default_rng(3))
    counts = np.bincount([int(t.s[0]) for t in draws], minlength=10)
    assert _within_3_sigma(counts, np.full(10, 0.1), n)


def test_prioritized_frequencies_after_update():
    buf = filled([0.01, 0.99])
    cfg = PERConfig(alpha=0.6)
    n = 100_000
    idx, _, _ = buf.sample_prioritized(n, cfg, np.random.default_rng(5))
    assert _within_3_sigma(np.bincount(idx, minlength=2), buf.probabilities(0.6), n)
    buf.update_priorities([0], [0.99 - 0.01], 0.01)
    idx, _, _ = buf.sample_prioritized(n, cfg, np.random.default_rng(6))
    assert _within_3_sigma(np.bincount(idx, minlength=2), np.array([0.5, 0.5]), n)


def test_untouched_priorities_stay_exact():
    buf = filled([0.5, 0.25, 2.0])
    before = buf.priorities.copy()
    buf.update_priorities([1], [0.0], 0.01)
    assert buf.priorities[1] == 0.01
    assert buf.priorities[0] == before[0] and buf.priorities[2] == before[2]


def test_update_out_of_range():
    buf = filled([0.5, 0.5])
    with pytest.raises(InvalidArgument):
        buf.update_priorities([2], [0.1], 0.01)


def test_weights_positive_and_capped():
    rng = np.random.default_rng(0)
    buf = filled(list(rng.uniform(0.01, 3.0, size=50)))
    _, _, w = buf.sample_prioritized(64, PERConfig(), rng)
    assert np.all(w > 0) and np.all(w <= 1.0) and w.max() == 1.0
    assert buf.probabilities(0.6).sum() == pytest.approx(1.0, abs=1e-12)


def test_alpha_beta_zero_matches_uniform():
    buf = filled([0.01, 0.5, 2.0, 7.0])
    cfg = PERConfig(alpha=0.0, beta=0.0)
    assert np.allclose(buf.probabilities(cfg.alpha), 0.25)
    _, _, w = buf.sample_prioritized(100, cfg, np.random.default_rng(0))
    assert np.all(w == 1.0)


def test_importance_weight_formula():
    buf = filled([0.01, 0.99])
    cfg = PERConfig(alpha=0.6, beta=0.7)
    idx, _, w = buf.sample_prioritized(200, cfg, np.random.default_rng(1))
    p = buf.probabilities(0.6)
    raw = (2 * p[idx]) ** -0.7
    assert np.allclose(w, raw / raw.max(), atol=1e-12)


def test_per_config_validation():
    with pytest.raises(InvalidArgument):
        PERConfig(alpha=-1)
    with pytest.raises(InvalidArgument):
        PERConfig(beta=1.5)
    with pytest.raises(InvalidArgument):
        PERConfig(eps0=0)
