"""Reward sign from the windowed history of synthetic-batch losses."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable


class LossHistory:
    """Ring buffer holding the last ``size`` synthetic losses."""

    def __init__(self, size: int = 10):
        if size < 1:
            raise ValueError("history size must be positive")
        self.size = size
        self.window: deque[float] = deque(maxlen=size)
        self.count = 0

    def push(self, loss: float) -> None:
        loss = float(loss)
        if not math.isfinite(loss) or loss < 0:
            raise ValueError(f"loss must be finite and nonnegative, got {loss}")
        self.window.append(loss)
        self.count += 1

    def mean(self) -> float:
        if not self.window:
            raise ValueError("mean of an empty history")
        return math.fsum(self.window) / len(self.window)

    def __len__(self) -> int:
        return len(self.window)


@dataclass(frozen=True)
class RewardSignal:
    delta: int
    triggering_loss: float
    window_mean: float


def mean_loss_per_joint(per_joint_losses: Iterable[tuple[float, bool]]) -> float:
    """Mean over the joints flagged as counted."""
    total, n = 0.0, 0
    for loss, counted in per_joint_losses:
        if counted:
            total += float(loss)
            n += 1
    if n == 0:
        raise ValueError("no counted joints")
    return total / n


def evaluate_reward(history: LossHistory, current_loss: float) -> RewardSignal:
    """Reward (+1) when the current loss reaches the window mean, else -1.

    The comparison uses the window before ``current_loss`` is pushed. With no
    history yet the teacher is rewarded.
    """
    current_loss = float(current_loss)
    if not math.isfinite(current_loss):
        raise ValueError("current loss is not finite")
    mean = history.mean() if len(history) else current_loss
    delta = 1 if current_loss >= mean else -1
    history.push(current_loss)
    return RewardSignal(delta, current_loss, mean)
