import numpy as np
import pytest
from hypothesis import given, strategies as st

from advteacher.sampler import BatchSpec
from advteacher.student import NUM_JOINTS, MaskPolicy, OracleStudent, masked_loss_aggregate


def test_max_difficulty_zero_skill():
    s = OracleStudent([1.0, 0.5], sigma=0.0)
    assert s.train_step([0]).tolist() == [1.0]


def test_mastered_group_has_zero_loss():
    s = OracleStudent([0.7, 0.5], sigma=0.0, s0=1.0)
    assert s.train_step([0, 1]).tolist() == [0.0, 0.0]


def test_skill_recursion_closed_form():
    s = OracleStudent([1.0, 1.0], eta=0.1, rho=0.0, sigma=0.0)
    simulated = 0.0
    for _ in range(10):
        s.train_step([0])
        simulated = simulated + 0.1 * (1 - simulated)
    assert s.skill[0] == pytest.approx(1 - 0.9**10, abs=1e-12)
    assert s.skill[0] == pytest.approx(simulated, abs=1e-12)
    assert round(s.skill[0], 4) == 0.6513


def test_untrained_groups_forget():
    s = OracleStudent([1.0, 1.0], eta=0.1, rho=0.01, sigma=0.0, s0=0.5)
    s.train_step([0])
    assert s.skill[1] == pytest.approx(0.49)
    assert s.skill[0] == pytest.approx(0.55)


def test_invalid_group_ids():
    s = OracleStudent([1.0, 1.0])
    with pytest.raises(ValueError):
        s.train_step([2])
    with pytest.raises(ValueError):
        s.train_step([-2])


def test_skill_bounds_and_nonnegative_losses(rng):
    s = OracleStudent(rng.uniform(0.05, 1, 6), eta=0.5, rho=0.1, sigma=0.5, seed=1)
    for _ in range(500):
        losses = s.train_step(rng.integers(-1, 6, size=4))
        assert np.all(losses >= 0)
        assert np.all((s.skill >= 0) & (s.skill <= 1))


def test_loss_non_increasing_without_noise_or_forgetting():
    s = OracleStudent([0.3, 1.0], eta=0.05, rho=0.0, sigma=0.0)
    prev = [np.inf, np.inf]
    for step in range(200):
        g = step % 2
        loss = s.train_step([g])[0]
        assert loss <= prev[g]
        prev[g] = loss


def test_hardest_group_recoverable_under_uniform_sampling():
    d = np.array([0.2, 0.9, 0.5, 0.35])
    s = OracleStudent(d, eta=0.01, rho=0.001, sigma=0.0)
    rng = np.random.default_rng(0)
    last = np.zeros(4)
    for _ in range(2000):
        g = int(rng.integers(4))
        last[g] = s.train_step([g])[0]
    expected = s.group_difficulty * (1 - s.group_skill)
    # losses observed last per group order like d * (1 - s)
    assert np.argmax(expected) == 1
    assert list(np.argsort(expected)) == list(np.argsort(s.expected_loss()))


def test_train_on_batch_shapes():
    s = OracleStudent([1.0, 0.1], sample_group=[0, 0, 1], sigma=0.0)
    real, synth = s.train_on(BatchSpec(0, np.array([3, 4]), np.array([0, 1])))
    assert real.shape == (2, NUM_JOINTS) and synth.shape == (2, NUM_JOINTS)
    assert np.all(synth == 1.0) and np.all(real == 0.5)


def test_masking_stops_synthetic_learning():
    s = OracleStudent([1.0, 0.1], sample_group=[0, 1], eta=0.1, rho=0.0, sigma=0.0)
    s.train_on(BatchSpec(0, np.array([0]), np.array([0])), MaskPolicy(True))
    assert s.group_skill[0] == 0.0
    s.train_on(BatchSpec(0, np.array([0]), np.array([0])), MaskPolicy(False))
    assert s.group_skill[0] == pytest.approx(0.1)


def test_evaluate_is_side_effect_free():
    s = OracleStudent([1.0, 0.1, 0.4], s0=0.3, sigma=0.1)
    before = s.skill.copy()
    a = s.evaluate()
    assert s.evaluate() == a
    np.testing.assert_array_equal(s.skill, before)
    d = np.array([1.0, 0.1, 0.4])
    assert a == pytest.approx(np.sum(d * d * 0.7) / d.sum())


@pytest.mark.parametrize("items, mask, expected", [
    ([(2.0, False), (4.0, True)], True, 2.0),
    ([(2.0, False), (4.0, True)], False, 3.0),
    ([(4.0, True)], True, 0.0),
])
def test_masked_aggregate(items, mask, expected):
    assert masked_loss_aggregate(items, MaskPolicy(mask)) == expected


def test_masked_aggregate_errors():
    with pytest.raises(ValueError):
        masked_loss_aggregate([], MaskPolicy())
    with pytest.raises(ValueError):
        masked_loss_aggregate([(float("inf"), False)], MaskPolicy())


@given(st.lists(st.tuples(st.floats(0, 100), st.booleans()), min_size=1, max_size=30))
def test_mask_never_changes_real_losses(items):
    real = [(l, s) for l, s in items if not s]
    on = masked_loss_aggregate(items, MaskPolicy(True))
    if real:
        assert on == pytest.approx(masked_loss_aggregate(real, MaskPolicy(False)))
    else:
        assert on == 0.0
