"""Run configuration: a single JSON file, every field defaulted."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .compositor import CompositionConfig
from .grouping import GroupingKind, GroupingSpec, MAX_DISTANCE_PX
from .metrics import EvalConfig


class ConfigError(ValueError):
    pass


@dataclass
class GroupingConfig:
    kind: str = "min_distance"
    num_groups: int = 10
    # optional explicit bounds; derived from the kind (and data) when omitted
    lower: float | None = None
    upper: float | None = None

    def validate(self):
        GroupingKind(self.kind)
        if not isinstance(self.num_groups, int) or self.num_groups < 2:
            raise ValueError("num_groups must be an integer >= 2")
        if (self.lower is None) != (self.upper is None):
            raise ValueError("lower and upper must be given together")
        if self.lower is not None:
            self.fixed_spec()

    def fixed_spec(self) -> GroupingSpec | None:
        if self.lower is not None:
            return GroupingSpec(GroupingKind(self.kind), self.num_groups, float(self.lower), float(self.upper))
        if GroupingKind(self.kind) is GroupingKind.MIN_DISTANCE:
            return GroupingSpec(GroupingKind.MIN_DISTANCE, self.num_groups, 0.0, MAX_DISTANCE_PX)
        return None


@dataclass
class TeacherConfig:
    alpha: float = 0.1
    epsilon: float = 0.1
    steps_per_group: int = 50  # N
    history: int = 10  # H
    lr: float = 3e-3
    hidden_dim: int = 32

    def validate(self):
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must be in [0, 1]")
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must be in [0, 1]")
        for name in ("steps_per_group", "history", "hidden_dim"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer")
        if not self.lr > 0:
            raise ValueError("lr must be positive")


@dataclass
class StudentConfig:
    difficulties: list[float] | None = None  # default: group 0 at 1.0, others 0.1
    eta: float = 0.001
    rho: float = 5e-5
    sigma: float = 0.2
    s0: float = 0.0
    real_difficulty: float = 0.5
    switch_step: int | None = None
    switch_difficulties: list[float] | None = None
    mask_synthetic_loss: bool = False

    def validate(self):
        for name in ("eta", "rho", "sigma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if not 0 <= self.s0 <= 1:
            raise ValueError("s0 must be in [0, 1]")
        if not 0 < self.real_difficulty <= 1:
            raise ValueError("real_difficulty must be in (0, 1]")
        if (self.switch_step is None) != (self.switch_difficulties is None):
            raise ValueError("switch_step and switch_difficulties must be given together")

    def difficulty_vector(self, num_groups: int) -> list[float]:
        if self.difficulties is None:
            return [1.0] + [0.1] * (num_groups - 1)
        if len(self.difficulties) != num_groups:
            raise ConfigError(f"student.difficulties: expected {num_groups} values, got {len(self.difficulties)}")
        return list(self.difficulties)


@dataclass
class DataConfig:
    dataset: str | None = None
    group_size: int | list[int] = 50
    real_pool_size: int = 100

    def validate(self):
        sizes = self.group_size if isinstance(self.group_size, list) else [self.group_size]
        if any(not isinstance(s, int) or s < 0 for s in sizes):
            raise ValueError("group_size entries must be nonnegative integers")
        if self.real_pool_size < 1:
            raise ValueError("real_pool_size must be positive")


@dataclass
class ComposeConfig:
    mode: str = "synthetic"  # or "mixed"
    lam: float | None = None  # default 9 for synthetic, 4 for mixed
    max_overlap_iou: float = 0.6
    pitch_range: list[float] = field(default_factory=lambda: [0.0, 45.0])
    renders_per_background: int = 5
    scale_range: list[float] = field(default_factory=lambda: [120.0, 320.0])
    max_attempts: int = 100
    num_backgrounds: int = 20
    background_dataset: str | None = None
    canvas: list[int] = field(default_factory=lambda: [640, 640])
    workers: int = 1

    def validate(self):
        if self.mode not in ("synthetic", "mixed"):
            raise ValueError("mode must be 'synthetic' or 'mixed'")
        if self.num_backgrounds < 1:
            raise ValueError("num_backgrounds must be positive")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        self.composition(0)

    def composition(self, seed: int) -> CompositionConfig:
        lam = self.lam if self.lam is not None else (9.0 if self.mode == "synthetic" else 4.0)
        return CompositionConfig(
            lam=float(lam), max_overlap_iou=float(self.max_overlap_iou),
            pitch_range=tuple(map(float, self.pitch_range)),
            renders_per_background=int(self.renders_per_background),
            scale_range=tuple(map(float, self.scale_range)),
            max_attempts=int(self.max_attempts), seed=int(seed),
        )


@dataclass
class EvalSection:
    num_occlusion_bins: int = 5
    pckh_threshold: float = 0.5
    real_only: bool = False
    holdout_scenes: int = 10

    def validate(self):
        self.eval_config()
        if self.holdout_scenes < 0:
            raise ValueError("holdout_scenes must be nonnegative")

    def eval_config(self) -> EvalConfig:
        return EvalConfig(self.num_occlusion_bins, self.pckh_threshold, self.real_only)


@dataclass
class RunConfig:
    mode: str = "teacher"
    seed: int = 0
    total_steps: int = 5000
    batch_size: int = 8
    output_dir: str = "runs/default"
    grouping: GroupingConfig = field(default_factory=GroupingConfig)
    teacher: TeacherConfig = field(default_factory=TeacherConfig)
    student: StudentConfig = field(default_factory=StudentConfig)
    data: DataConfig = field(default_factory=DataConfig)
    compose: ComposeConfig = field(default_factory=ComposeConfig)
    eval: EvalSection = field(default_factory=EvalSection)

    def validate(self):
        if self.mode not in ("teacher", "uniform"):
            raise ValueError("mode must be 'teacher' or 'uniform'")
        if not isinstance(self.total_steps, int) or self.total_steps < 1:
            raise ValueError("total_steps must be a positive integer")
        if not isinstance(self.batch_size, int) or self.batch_size < 2 or self.batch_size % 2:
            raise ValueError("batch_size must be a positive even integer")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["compose"]["lambda"] = d["compose"].pop("lam")
        return d


_SECTIONS = {
    "grouping": GroupingConfig, "teacher": TeacherConfig, "student": StudentConfig,
    "data": DataConfig, "compose": ComposeConfig, "eval": EvalSection,
}
_ALIASES = {"compose": {"lambda": "lam"}}


def _build(cls, data: Any, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        name = _ALIASES.get(where, {}).get(key, key)
        if name not in names:
            raise ConfigError(f"{where + '.' if where else ''}{key}: unknown field")
        if name in _SECTIONS and cls is RunConfig:
            value = _build(_SECTIONS[name], value, name)
        kwargs[name] = value
    try:
        obj = cls(**kwargs)
    except TypeError as e:
        raise ConfigError(f"{where or 'config'}: {e}") from None
    return obj


def _validate(obj, where: str):
    try:
        obj.validate()
    except (ValueError, TypeError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"{where}: {e}") from None


def config_from_dict(data: dict) -> RunConfig:
    cfg = _build(RunConfig, data, "")
    _validate(cfg, "config")
    for name in _SECTIONS:
        _validate(getattr(cfg, name), name)
    cfg.student.difficulty_vector(cfg.grouping.num_groups)
    if cfg.student.switch_difficulties is not None:
        if len(cfg.student.switch_difficulties) != cfg.grouping.num_groups:
            raise ConfigError("student.switch_difficulties: length must equal grouping.num_groups")
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"{path}: cannot read config ({e.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from None
    return config_from_dict(data)
