"""Student contract, a simulated student with known difficulty, and loss masking."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .sampler import BatchSpec

NUM_JOINTS = 14


class Student(Protocol):
    freezes_feature_layers: bool

    def train_on(self, batch: BatchSpec) -> tuple[np.ndarray, np.ndarray]:
        """Train one step; return per-joint losses for the (real, synthetic) halves."""

    def evaluate(self, holdout=None) -> float:
        ...


@dataclass(frozen=True)
class MaskPolicy:
    mask_synthetic_loss: bool = False


def masked_loss_aggregate(per_instance_losses: Sequence[tuple[float, bool]], policy: MaskPolicy) -> float:
    """Mean loss over instances, skipping synthetic ones when the policy masks them.

    Returns 0.0 when every instance is masked.
    """
    if len(per_instance_losses) == 0:
        raise ValueError("no instances")
    kept = []
    for loss, is_synthetic in per_instance_losses:
        if not math.isfinite(loss):
            raise ValueError(f"non-finite loss {loss}")
        if policy.mask_synthetic_loss and is_synthetic:
            continue
        kept.append(float(loss))
    return math.fsum(kept) / len(kept) if kept else 0.0


class OracleStudent:
    """Simulated learner with a skill level per group.

    A group-g sample costs ``d_g * (1 - s_g)`` plus Gaussian noise. Training on
    a group closes a fraction ``eta * d_g`` of its remaining skill gap; groups
    left out of a step lose ``rho`` skill. Real samples live in their own
    domain (index ``num_groups``) with difficulty ``real_difficulty``.
    """

    freezes_feature_layers = False

    def __init__(
        self,
        difficulties,
        sample_group=None,
        *,
        eta: float = 0.05,
        rho: float = 0.002,
        sigma: float = 0.02,
        s0: float = 0.0,
        real_difficulty: float = 0.5,
        seed: int = 0,
    ):
        d = np.asarray(difficulties, dtype=float)
        self._check_difficulties(d)
        if not 0.0 <= s0 <= 1.0:
            raise ValueError("s0 must be in [0, 1]")
        self.num_groups = d.size
        self.difficulty = np.append(d, real_difficulty)
        self.skill = np.full(d.size + 1, float(s0))
        self.eta, self.rho, self.sigma = eta, rho, sigma
        self.sample_group = None if sample_group is None else np.asarray(sample_group, dtype=int)
        self.rng = np.random.default_rng(seed)

    @staticmethod
    def _check_difficulties(d):
        if d.ndim != 1 or np.any(d <= 0) or np.any(d > 1):
            raise ValueError("difficulties must lie in (0, 1]")

    @property
    def group_skill(self) -> np.ndarray:
        return self.skill[: self.num_groups]

    @property
    def group_difficulty(self) -> np.ndarray:
        return self.difficulty[: self.num_groups]

    def set_difficulties(self, difficulties) -> None:
        d = np.asarray(difficulties, dtype=float)
        self._check_difficulties(d)
        if d.size != self.num_groups:
            raise ValueError("cannot change the number of groups")
        self.difficulty[: self.num_groups] = d

    def expected_loss(self) -> np.ndarray:
        """Noise-free per-group loss."""
        return self.group_difficulty * (1.0 - self.group_skill)

    def train_step(self, group_ids, learn=None) -> np.ndarray:
        """Per-sample losses for ``group_ids`` (-1 = real), then update skills.

        ``learn`` optionally flags which samples carry gradient; masked samples
        still report a loss but do not count as training their group.
        """
        ids = np.asarray(group_ids, dtype=int)
        if np.any(ids < -1) or np.any(ids >= self.num_groups):
            raise ValueError(f"group ids out of range: {ids}")
        idx = np.where(ids < 0, self.num_groups, ids)
        d, s = self.difficulty[idx], self.skill[idx]
        losses = d * (1.0 - s)
        if self.sigma > 0:
            losses = losses + self.rng.normal(0.0, self.sigma, size=losses.shape)
        losses = np.maximum(losses, 0.0)

        trained = np.zeros(self.skill.size, dtype=bool)
        trained[idx if learn is None else idx[np.asarray(learn, dtype=bool)]] = True
        gain = self.eta * self.difficulty * (1.0 - self.skill)
        self.skill = np.where(trained, np.minimum(1.0, self.skill + gain), np.maximum(0.0, self.skill - self.rho))
        return losses

    def train_on(self, batch: BatchSpec, mask: MaskPolicy = MaskPolicy()) -> tuple[np.ndarray, np.ndarray]:
        if self.sample_group is None:
            raise RuntimeError("train_on needs a sample_group lookup")
        synth_groups = self.sample_group[np.asarray(batch.synthetic_sample_ids, dtype=int)]
        n_real = len(batch.real_sample_ids)
        ids = np.concatenate([np.full(n_real, -1), synth_groups])
        learn = np.ones(ids.size, dtype=bool)
        if mask.mask_synthetic_loss:
            learn[n_real:] = False
        losses = self.train_step(ids, learn)
        per_joint = np.repeat(losses[:, None], NUM_JOINTS, axis=1)
        return per_joint[:n_real], per_joint[n_real:]

    def evaluate(self, holdout=None) -> float:
        """Difficulty-weighted mean of the noise-free group losses.

        ``holdout`` optionally restricts the groups considered.
        """
        groups = np.arange(self.num_groups) if holdout is None else np.asarray(holdout, dtype=int)
        d = self.group_difficulty[groups]
        return float(np.sum(d * self.expected_loss()[groups]) / np.sum(d))
