"""Arithmetic on group distributions: pseudo-ground-truth updates and KL."""

from __future__ import annotations

import math

import numpy as np

PROB_FLOOR = 1e-6
SUM_TOL = 1e-9


def validate_distribution(p, num_groups: int | None = None) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("a group distribution must be a non-empty vector")
    if num_groups is not None and p.size != num_groups:
        raise ValueError(f"expected {num_groups} groups, got {p.size}")
    total = float(p.sum())
    if not math.isfinite(total):  # any nan/inf entry poisons the sum
        raise ValueError("distribution has non-finite entries")
    if p.min() < 0 or p.max() > 1:
        raise ValueError("distribution entries must lie in [0, 1]")
    if abs(total - 1.0) > SUM_TOL:
        raise ValueError(f"distribution sums to {total!r}, not 1")
    return p


def is_distribution(p) -> bool:
    try:
        validate_distribution(p)
    except ValueError:
        return False
    return True


def raw_pseudo_gt_update(p_tilde, selected: int, alpha: float, delta: int) -> np.ndarray:
    """Move mass toward (delta=+1) or away from (delta=-1) the selected group.

    The selected entry changes by ``delta*alpha*p_i``; every other entry changes
    by the negated amount split evenly, so the total is preserved. No clamping.
    """
    p = np.asarray(p_tilde, dtype=float)
    g = p.size
    if g < 2:
        raise ValueError("need at least two groups")
    if not 0 <= selected < g or int(selected) != selected:
        raise ValueError(f"selected group {selected!r} out of range [0, {g})")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if delta not in (1, -1):
        raise ValueError(f"delta must be +1 or -1, got {delta!r}")
    shift = delta * alpha * p[selected]
    out = p - shift / (g - 1)
    out[selected] = p[selected] + shift
    return out


def clamp_renormalize(p, floor: float = PROB_FLOOR) -> np.ndarray:
    q = np.clip(np.asarray(p, dtype=float), floor, 1.0)
    return q / q.sum()


def pseudo_gt_update(p_tilde, selected: int, alpha: float, delta: int, floor: float = PROB_FLOOR) -> np.ndarray:
    validate_distribution(p_tilde)
    return clamp_renormalize(raw_pseudo_gt_update(p_tilde, selected, alpha, delta), floor)


def kl_divergence(p, q) -> float:
    """KL(p || q) with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
        raise ValueError("non-finite entries")
    mask = p > 0
    if np.any(q[mask] <= 0):
        raise ValueError("q has zero mass where p does not")
    return max(float(np.sum(p[mask] * np.log(p[mask] / q[mask]))), 0.0)
