"""Group selection (epsilon-greedy, latched for N steps) and batch assembly."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BatchSpec:
    group: int
    real_sample_ids: np.ndarray
    synthetic_sample_ids: np.ndarray

    @property
    def batch_size(self) -> int:
        return len(self.real_sample_ids) + len(self.synthetic_sample_ids)


class SamplingSchedule:
    """Holds the latched group and the RNG driving every sampling decision."""

    def __init__(self, num_groups: int, epsilon: float = 0.1, steps_per_group: int = 50, seed: int = 0):
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
        if steps_per_group < 1:
            raise ValueError("steps_per_group must be positive")
        self.num_groups = num_groups
        self.epsilon = epsilon
        self.steps_per_group = steps_per_group
        self.rng = np.random.default_rng(seed)
        self.current_group: int | None = None
        self.steps_remaining = 0
        self.explored = False
        self.fallbacks = 0

    @property
    def needs_group(self) -> bool:
        return self.current_group is None or self.steps_remaining == 0

    def choose_group(self, p_tilde) -> int:
        """Draw from ``p_tilde``, or uniformly with probability epsilon, and latch it."""
        p = np.asarray(p_tilde, dtype=float)
        if p.size == 0:
            raise ValueError("empty distribution")
        if p.size != self.num_groups:
            raise ValueError(f"distribution has {p.size} groups, schedule has {self.num_groups}")
        self.explored = bool(self.rng.random() < self.epsilon)
        if self.explored:
            g = int(self.rng.integers(self.num_groups))
        else:
            g = int(self.rng.choice(self.num_groups, p=p / p.sum()))
        self.current_group = g
        self.steps_remaining = self.steps_per_group
        return g

    def draw_batch(self, real_pool, synthetic_pool_by_group, batch_size: int) -> BatchSpec:
        """Half the batch from the real pool, half from the latched group, with replacement."""
        if batch_size <= 0 or batch_size % 2:
            raise ValueError(f"batch_size must be a positive even number, got {batch_size}")
        if self.current_group is None:
            raise RuntimeError("no group latched; call choose_group first")
        real_pool = np.asarray(real_pool)
        if real_pool.size == 0:
            raise ValueError("real pool is empty")
        pools = [np.asarray(ids) for ids in synthetic_pool_by_group]
        if len(pools[self.current_group]) == 0:
            nonempty = [g for g, ids in enumerate(pools) if len(ids)]
            if not nonempty:
                raise ValueError("every synthetic group is empty")
            old = self.current_group
            self.current_group = int(nonempty[self.rng.integers(len(nonempty))])
            self.fallbacks += 1
            log.info("group %d is empty; re-drew group %d", old, self.current_group)
        half = batch_size // 2
        pool = pools[self.current_group]
        real = real_pool[self.rng.integers(real_pool.size, size=half)]
        synth = pool[self.rng.integers(len(pool), size=half)]
        self.steps_remaining = max(self.steps_remaining - 1, 0)
        return BatchSpec(self.current_group, real, synth)
