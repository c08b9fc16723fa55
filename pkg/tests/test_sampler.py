import numpy as np
import pytest
from scipy import stats

from advteacher.sampler import SamplingSchedule


def pools_of(sizes):
    ids = np.arange(sum(sizes))
    return list(np.split(ids, np.cumsum(sizes)[:-1]))


def test_pure_exploration_is_uniform():
    s = SamplingSchedule(10, epsilon=1.0, seed=0)
    p = np.zeros(10)
    p[3] = 1.0
    counts = np.bincount([s.choose_group(p) for _ in range(10**5)], minlength=10)
    assert np.all(np.abs(counts / 10**5 - 0.1) < 0.01)


def test_no_exploration_one_hot():
    s = SamplingSchedule(10, epsilon=0.0, seed=0)
    p = np.eye(10)[4]
    assert {s.choose_group(p) for _ in range(1000)} == {4}


def test_epsilon_mixture_frequency():
    n, eps = 10**5, 0.1
    s = SamplingSchedule(10, epsilon=eps, seed=1)
    hits = sum(s.choose_group(np.eye(10)[0]) == 0 for _ in range(n))
    expected = (1 - eps) + eps / 10  # closed-form mixture
    sd = np.sqrt(expected * (1 - expected) / n)
    assert abs(hits / n - expected) < 3 * sd


def test_batch_composition():
    s = SamplingSchedule(3, seed=0)
    s.choose_group([0.2, 0.3, 0.5])
    b = s.draw_batch(np.arange(100, 120), pools_of([5, 5, 5]), 8)
    assert len(b.real_sample_ids) == len(b.synthetic_sample_ids) == 4
    assert set(b.synthetic_sample_ids) <= set(pools_of([5, 5, 5])[b.group])
    assert set(b.real_sample_ids) <= set(range(100, 120))


def test_single_sample_group_repeats():
    s = SamplingSchedule(2, epsilon=0.0, seed=0)
    s.choose_group([1.0, 0.0])
    b = s.draw_batch(np.arange(10), [np.array([42]), np.array([1, 2])], 8)
    assert b.synthetic_sample_ids.tolist() == [42] * 4


def test_within_group_draws_are_uniform():
    sizes = [7, 13, 4]
    pools = pools_of(sizes)
    s = SamplingSchedule(3, epsilon=0.0, steps_per_group=10**9, seed=2)
    s.choose_group([0.0, 1.0, 0.0])
    counts = np.zeros(sum(sizes), dtype=int)
    for _ in range(10**4):
        b = s.draw_batch(np.arange(5), pools, 8)
        np.add.at(counts, b.synthetic_sample_ids, 1)
    obs = counts[pools[1]]
    assert obs.sum() == 4 * 10**4
    assert stats.chisquare(obs).pvalue > 0.01


@pytest.mark.parametrize("bs", [0, 7, -2])
def test_odd_batch_rejected(bs):
    s = SamplingSchedule(2, seed=0)
    s.choose_group([0.5, 0.5])
    with pytest.raises(ValueError):
        s.draw_batch(np.arange(4), pools_of([2, 2]), bs)


def test_empty_group_fallback():
    s = SamplingSchedule(3, epsilon=0.0, seed=0)
    s.choose_group([1.0, 0.0, 0.0])
    b = s.draw_batch(np.arange(4), [np.array([], dtype=int), np.array([5]), np.array([])], 4)
    assert b.group == 1 and s.fallbacks == 1
    with pytest.raises(ValueError):
        s.draw_batch(np.arange(4), [np.array([]), np.array([]), np.array([])], 4)


def test_latching_holds_for_n_batches():
    n = 7
    s = SamplingSchedule(5, epsilon=0.5, steps_per_group=n, seed=3)
    pools = pools_of([3] * 5)
    groups, selections = [], 0
    for _ in range(20 * n):
        if s.needs_group:
            s.choose_group(np.full(5, 0.2))
            selections += 1
        groups.append(s.draw_batch(np.arange(4), pools, 2).group)
    assert selections == 20
    for k in range(20):
        assert len(set(groups[k * n:(k + 1) * n])) == 1


def test_same_seed_same_batches():
    def run():
        s = SamplingSchedule(4, seed=9)
        out = []
        for _ in range(200):
            if s.needs_group:
                s.choose_group([0.1, 0.2, 0.3, 0.4])
            b = s.draw_batch(np.arange(10), pools_of([3, 3, 3, 3]), 6)
            out.append((b.group, b.real_sample_ids.tolist(), b.synthetic_sample_ids.tolist()))
        return out
    assert run() == run()


def test_bad_epsilon():
    with pytest.raises(ValueError):
        SamplingSchedule(3, epsilon=1.5)
