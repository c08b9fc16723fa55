"""Difficulty groups: binning of a scalar sample feature into group ids."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

# Canvas side length; also the isolation distance assigned to lone persons.
MAX_DISTANCE_PX = 640.0


class GroupingWarning(UserWarning):
    pass


class GroupingKind(str, enum.Enum):
    MIN_DISTANCE = "min_distance"
    CAMERA_PITCH = "camera_pitch"


@dataclass(frozen=True)
class GroupingSpec:
    """Linear binning of ``[lower, upper)`` into ``num_groups`` bins.

    Values outside the interval are clamped into the first or last bin.
    """

    kind: GroupingKind
    num_groups: int
    lower: float
    upper: float

    def __post_init__(self):
        object.__setattr__(self, "kind", GroupingKind(self.kind))
        if int(self.num_groups) != self.num_groups or self.num_groups < 2:
            raise ValueError(f"num_groups must be an integer >= 2, got {self.num_groups!r}")
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError("grouping bounds must be finite")
        if not self.upper > self.lower:
            raise ValueError(f"upper ({self.upper}) must exceed lower ({self.lower})")

    @property
    def bin_width(self) -> float:
        return (self.upper - self.lower) / self.num_groups

    @property
    def edges(self) -> np.ndarray:
        return np.array([self.edge(k) for k in range(self.num_groups + 1)])

    def edge(self, k: int) -> float:
        return self.lower + k * (self.upper - self.lower) / self.num_groups

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "num_groups": int(self.num_groups),
            "lower": float(self.lower),
            "upper": float(self.upper),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroupingSpec":
        return cls(GroupingKind(d["kind"]), int(d["num_groups"]), float(d["lower"]), float(d["upper"]))


def build_min_distance_spec(num_groups: int = 10) -> GroupingSpec:
    return GroupingSpec(GroupingKind.MIN_DISTANCE, num_groups, 0.0, MAX_DISTANCE_PX)


def build_pitch_spec(pitch_values, num_groups: int = 10) -> GroupingSpec:
    """Pitch bins over ``[min(X) + Var(X), max(X) - Var(X))``.

    ``Var`` is the population variance. When that interval is empty the full
    ``[min(X), max(X))`` range is used instead and a `GroupingWarning` is issued.
    """
    x = np.asarray(pitch_values, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("pitch_values is empty")
    if not np.all(np.isfinite(x)):
        raise ValueError("pitch_values contains non-finite entries")
    var = float(np.var(x))
    lo, hi = float(x.min()) + var, float(x.max()) - var
    if lo >= hi:
        warnings.warn(
            f"variance-shrunk pitch interval [{lo:g}, {hi:g}) is empty; "
            f"falling back to [{x.min():g}, {x.max():g})",
            GroupingWarning,
            stacklevel=2,
        )
        lo, hi = float(x.min()), float(x.max())
    if lo >= hi:
        raise ValueError("pitch_values span a degenerate range")
    return GroupingSpec(GroupingKind.CAMERA_PITCH, num_groups, lo, hi)


def assign_group(spec: GroupingSpec, value: float) -> int:
    v = float(value)
    if math.isnan(v):
        raise ValueError("cannot assign a group to NaN")
    n = spec.num_groups
    if v < spec.lower:
        return 0
    if v >= spec.upper:
        return n - 1
    w = spec.bin_width
    k = min(max(int((v - spec.lower) // w), 0), n - 1)
    # floor division can land one bin off next to an edge
    if v < spec.edge(k):
        k -= 1
    elif k + 1 < n and v >= spec.edge(k + 1):
        k += 1
    return k


def assign_groups(spec: GroupingSpec, values) -> np.ndarray:
    return np.array([assign_group(spec, v) for v in np.asarray(values, dtype=float).ravel()], dtype=int)


def min_distances(reference_points, isolated: float = MAX_DISTANCE_PX) -> np.ndarray:
    """Per-person distance to the nearest other person's reference point.

    A person alone in the image gets ``isolated``.
    """
    pts = np.asarray(reference_points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n == 0:
        return np.zeros(0)
    if n == 1:
        return np.array([float(isolated)])
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    np.fill_diagonal(dist, np.inf)
    return dist.min(axis=1)
