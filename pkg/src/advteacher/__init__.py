"""Adversarial teacher for curriculum sampling over groups of synthetic data."""

__version__ = "0.1.0"

from .grouping import GroupingKind, GroupingSpec, assign_group, build_min_distance_spec, build_pitch_spec
from .simplex import kl_divergence, pseudo_gt_update
from .teacher import AdamState, TeacherNet, apply_update, forward, loss_and_gradients
from .reward import LossHistory, RewardSignal, evaluate_reward, mean_loss_per_joint
from .sampler import BatchSpec, SamplingSchedule
from .student import MaskPolicy, OracleStudent, masked_loss_aggregate
from .compositor import CompositionConfig, SceneAnnotation, compose_scene, make_template_library
from .annotations import read_dataset, write_dataset
from .metrics import EvalConfig, match_and_score
from .config import RunConfig, config_from_dict, load_config
from .runner import train

__all__ = [
    "GroupingKind", "GroupingSpec", "assign_group", "build_min_distance_spec", "build_pitch_spec",
    "kl_divergence", "pseudo_gt_update",
    "AdamState", "TeacherNet", "apply_update", "forward", "loss_and_gradients",
    "LossHistory", "RewardSignal", "evaluate_reward", "mean_loss_per_joint",
    "BatchSpec", "SamplingSchedule",
    "MaskPolicy", "OracleStudent", "masked_loss_aggregate",
    "CompositionConfig", "SceneAnnotation", "compose_scene", "make_template_library",
    "read_dataset", "write_dataset", "EvalConfig", "match_and_score",
    "RunConfig", "config_from_dict", "load_config", "train",
]
