import numpy as np
import pytest
from hypothesis import given, strategies as st

from advteacher.reward import LossHistory, RewardSignal, evaluate_reward, mean_loss_per_joint


def history_of(values, size=None):
    h = LossHistory(size or max(len(values), 1))
    for v in values:
        h.push(v)
    return h


@pytest.mark.parametrize("pairs, expected", [
    ([(1, True), (3, True)], 2.0),
    ([(1, True), (3, False)], 1.0),
    ([(float(k), True) for k in range(17)], 8.0),
])
def test_mean_loss_per_joint(pairs, expected):
    oracle = sum(l for l, c in pairs if c) / sum(1 for _, c in pairs if c)
    assert mean_loss_per_joint(pairs) == pytest.approx(expected, abs=1e-12) == pytest.approx(oracle)


def test_mean_loss_per_joint_needs_counted_joint():
    with pytest.raises(ValueError):
        mean_loss_per_joint([(1.0, False)])


@pytest.mark.parametrize("window, current, delta, mean", [
    ([1, 2, 3], 2.0, +1, 2.0),
    ([5], 1.0, -1, 5.0),
    ([2, 2, 2], 2.0, +1, 2.0),
])
def test_reward_examples(window, current, delta, mean):
    h = history_of(window)
    sig = evaluate_reward(h, current)
    assert sig.delta == delta
    assert abs(sig.window_mean - mean) < 1e-9
    assert list(h.window)[-1] == current  # compare, then push


def test_warm_up_rewards():
    sig = evaluate_reward(LossHistory(10), 0.3)
    assert sig == RewardSignal(1, 0.3, 0.3)


def test_non_finite_loss_rejected():
    with pytest.raises(ValueError):
        evaluate_reward(LossHistory(3), float("nan"))


def test_history_never_exceeds_size():
    h = LossHistory(4)
    for k in range(10):
        h.push(k)
        assert len(h) <= 4
    assert h.count == 10


@given(st.integers(1, 20), st.lists(st.floats(0, 1e3), min_size=1, max_size=200))
def test_ring_buffer_mean(size, pushes):
    h = history_of(pushes, size)
    tail = pushes[-size:]
    assert h.mean() == pytest.approx(sum(tail) / len(tail), rel=1e-12, abs=1e-12)


@given(st.lists(st.floats(0, 10), min_size=1, max_size=15), st.floats(0, 10))
def test_reward_is_pure(window, current):
    a = evaluate_reward(history_of(window, 15), current)
    b = evaluate_reward(history_of(window, 15), current)
    assert a == b
    assert (a.delta == 1) == (a.triggering_loss >= a.window_mean)


def test_constant_stream_always_rewarded():
    h = LossHistory(10)
    assert all(evaluate_reward(h, 0.7).delta == 1 for _ in range(100))
