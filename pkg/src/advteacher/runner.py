"""Experiment drivers: dataset composition, teacher/uniform training, evaluation."""

from __future__ import annotations

import json
import logging
import platform
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .annotations import read_dataset, write_dataset
from .compositor import (NUM_KEYPOINTS, empty_background, compose_dataset, make_real_backgrounds,
                         make_template_library)
from .config import RunConfig
from .grouping import GroupingKind, GroupingSpec, assign_group, build_pitch_spec
from .metrics import EvalReport, match_and_score, read_predictions
from .reward import LossHistory, evaluate_reward, mean_loss_per_joint
from .sampler import SamplingSchedule
from .simplex import pseudo_gt_update
from .student import MaskPolicy, OracleStudent, masked_loss_aggregate
from .teacher import (AdamState, StudentStateTracker, TeacherNet, apply_update, forward,
                      loss_and_gradients, save_checkpoint)

log = logging.getLogger(__name__)

TAIL_STEPS = 500


def _r(x: float, nd: int = 10) -> float:
    return round(float(x), nd)


def _write_meta(out: Path, command: str, config: RunConfig, started: float) -> None:
    """Timestamps live here only; every other output is a function of (config, seed)."""
    meta = {
        "command": command,
        "started": time.strftime("%Y-%m-%dT%H:%M:%S", time.localtime(started)),
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "seconds": round(time.time() - started, 3),
        "version": __version__,
        "python": platform.python_version(),
        "seed": config.seed,
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


# -- grouping of dataset samples ---------------------------------------------

def person_features(scene) -> list[tuple[float, float]]:
    """``(min_distance_px, camera_pitch_deg)`` for every person in a scene."""
    return [(float(d), float(scene.camera_pitch_deg)) for d in scene.min_distances]


def grouping_for(config: RunConfig, pitch_values=None) -> GroupingSpec:
    spec = config.grouping.fixed_spec()
    if spec is not None:
        return spec
    if pitch_values is None or len(pitch_values) == 0:
        raise ValueError("camera-pitch grouping needs pitch values from a dataset")
    return build_pitch_spec(pitch_values, config.grouping.num_groups)


def feature_value(spec: GroupingSpec, features: tuple[float, float]) -> float:
    return features[0] if spec.kind is GroupingKind.MIN_DISTANCE else features[1]


@dataclass
class SamplePools:
    spec: GroupingSpec
    real_pool: np.ndarray
    synthetic_by_group: list[np.ndarray]
    sample_group: np.ndarray  # synthetic sample id -> group


def build_pools(config: RunConfig, scenes=None) -> SamplePools:
    g = config.grouping.num_groups
    if scenes is None:
        sizes = config.data.group_size
        sizes = sizes if isinstance(sizes, list) else [sizes] * g
        if len(sizes) != g:
            raise ValueError(f"data.group_size: expected {g} entries")
        sample_group = np.repeat(np.arange(g), sizes)
        spec = config.grouping.fixed_spec() or GroupingSpec(GroupingKind(config.grouping.kind), g, 0.0, 1.0)
        real_pool = np.arange(config.data.real_pool_size)
    else:
        synth_feats, n_real = [], 0
        for s in scenes:
            for p, f in zip(s.persons, person_features(s)):
                if p.is_synthetic:
                    synth_feats.append(f)
                else:
                    n_real += 1
        spec = grouping_for(config, [f[1] for f in synth_feats])
        sample_group = np.array([assign_group(spec, feature_value(spec, f)) for f in synth_feats], dtype=int)
        real_pool = np.arange(n_real if n_real else config.data.real_pool_size)
    pools = [np.flatnonzero(sample_group == k) for k in range(g)]
    return SamplePools(spec, real_pool, pools, sample_group)


# -- training ------------------------------------------------------------------

@dataclass
class TrainResult:
    p_tilde: np.ndarray
    groups: np.ndarray
    deltas: np.ndarray
    synthetic_loss: np.ndarray
    weighted_loss: np.ndarray
    student: OracleStudent
    net: TeacherNet | None
    report: EvalReport | None = None
    summary: dict = field(default_factory=dict)

    def tail_mean_p(self, n: int = TAIL_STEPS) -> np.ndarray:
        return self.p_tilde[-n:].mean(axis=0)

    def tail_weighted_loss(self, n: int = TAIL_STEPS) -> float:
        return float(self.weighted_loss[-n:].mean())


def oracle_predictions(student: OracleStudent, scenes, spec: GroupingSpec, rng) -> dict:
    """Keypoint predictions whose error grows with the student's loss on each person's group."""
    exp_loss = student.expected_loss()
    out = {}
    for s in scenes:
        persons = []
        for p, f in zip(s.persons, person_features(s)):
            g = assign_group(spec, feature_value(spec, f))
            scale = (p.head_size or 1.0) * (0.2 + exp_loss[g] + 0.3 * (~p.visible))
            persons.append(p.keypoints + rng.normal(size=(NUM_KEYPOINTS, 2)) * scale[:, None])
        out[s.scene_id] = persons
    return out


def train(config: RunConfig, out_dir=None, *, scenes=None, log_every: int = 1) -> TrainResult:
    """Run the teacher-driven (or uniform) sampling loop against the oracle student.

    With ``out_dir`` set, writes ``log.jsonl`` (one record per step),
    ``summary.json``, ``report.json``/``report.csv``, ``teacher.ckpt`` and the
    ``meta.json`` timestamp sidecar.
    """
    started = time.time()
    tc, sc = config.teacher, config.student
    g = config.grouping.num_groups
    if scenes is None and config.data.dataset:
        scenes = read_dataset(config.data.dataset)
    pools = build_pools(config, scenes)

    ss = np.random.SeedSequence(config.seed)
    s_sched, s_student, s_teacher, s_eval = ss.spawn(4)
    student = OracleStudent(
        sc.difficulty_vector(g), pools.sample_group, eta=sc.eta, rho=sc.rho, sigma=sc.sigma,
        s0=sc.s0, real_difficulty=sc.real_difficulty, seed=s_student,
    )
    mask = MaskPolicy(sc.mask_synthetic_loss)
    teacher_mode = config.mode == "teacher"
    schedule = SamplingSchedule(g, tc.epsilon, tc.steps_per_group, s_sched)
    tracker = StudentStateTracker(g)
    history = LossHistory(tc.history)
    net = opt = None
    if teacher_mode:
        net = TeacherNet.init(tracker.input_dim, tc.hidden_dim, g, s_teacher)
        opt = AdamState.for_net(net, tc.lr)
    uniform = np.full(g, 1.0 / g)

    T = config.total_steps
    p_hist = np.empty((T, g))
    groups = np.empty(T, dtype=int)
    deltas = np.empty(T, dtype=int)
    loss_s = np.empty(T)
    wloss = np.empty(T)

    out = None
    logf = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        logf = (out / "log.jsonl").open("w", newline="\n")
    try:
        for t in range(T):
            if sc.switch_step is not None and t == sc.switch_step:
                student.set_difficulties(sc.switch_difficulties)
            state = tracker.vector()
            p = forward(net, state) if teacher_mode else uniform
            selected = schedule.needs_group
            if selected:
                schedule.choose_group(p)
            batch = schedule.draw_batch(pools.real_pool, pools.synthetic_by_group, config.batch_size)
            real_pj, synth_pj = student.train_on(batch, mask)

            per_img_s = [mean_loss_per_joint((l, True) for l in row) for row in synth_pj]
            per_img_r = [mean_loss_per_joint((l, True) for l in row) for row in real_pj]
            ls = float(np.mean(per_img_s))
            lr_ = float(np.mean(per_img_r))
            total = masked_loss_aggregate([(l, False) for l in per_img_r] + [(l, True) for l in per_img_s], mask)
            tracker.observe(batch.group, ls)
            sig = evaluate_reward(history, ls)

            teacher_loss = None
            if teacher_mode:
                target = pseudo_gt_update(p, batch.group, tc.alpha, sig.delta)
                teacher_loss, grads = loss_and_gradients(net, state, target)
                net, opt = apply_update(net, opt, grads)

            p_hist[t], groups[t], deltas[t], loss_s[t] = p, batch.group, sig.delta, ls
            wloss[t] = student.evaluate()
            if logf is not None and (t % log_every == 0 or t == T - 1):
                rec = {
                    "step": t,
                    "group": int(batch.group),
                    "selected": selected,
                    "explored": schedule.explored if selected else None,
                    "p_tilde": [_r(v) for v in p],
                    "delta": sig.delta,
                    "window_mean": _r(sig.window_mean),
                    "loss_synthetic": _r(ls),
                    "loss_real": _r(lr_),
                    "loss_total": _r(total),
                    "teacher_loss": None if teacher_loss is None else _r(teacher_loss),
                    "skills": [_r(v) for v in student.group_skill],
                    "weighted_loss": _r(wloss[t]),
                }
                logf.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")
                logf.flush()
    finally:
        if logf is not None:
            logf.close()

    result = TrainResult(p_hist, groups, deltas, loss_s, wloss, student, net)
    tail = min(TAIL_STEPS, T)
    result.summary = {
        "mode": config.mode,
        "seed": config.seed,
        "total_steps": T,
        "grouping": pools.spec.to_dict(),
        "tail_steps": tail,
        "tail_mean_p_tilde": [_r(v) for v in result.tail_mean_p(tail)],
        "tail_weighted_loss": _r(result.tail_weighted_loss(tail)),
        "final_skills": [_r(v) for v in student.group_skill],
        "group_counts": np.bincount(groups, minlength=g).tolist(),
        "empty_group_fallbacks": schedule.fallbacks,
    }

    if config.eval.holdout_scenes > 0:
        holdout = _holdout_scenes(config)
        preds = oracle_predictions(student, holdout, pools.spec, np.random.default_rng(s_eval))
        result.report = match_and_score(preds, holdout, config.eval.eval_config())

    if out is not None:
        (out / "summary.json").write_text(json.dumps(result.summary, indent=2, sort_keys=True) + "\n")
        resolved = config.to_dict()
        resolved.pop("output_dir")  # keeps run directories relocatable and comparable
        (out / "config.json").write_text(json.dumps(resolved, indent=2, sort_keys=True) + "\n")
        if result.report is not None:
            result.report.write(out)
        if net is not None:
            save_checkpoint(out / "teacher.ckpt", net, seed=config.seed, step=T)
        _write_meta(out, "train", config, started)
    return result


def _holdout_scenes(config: RunConfig):
    comp = config.compose.composition(config.seed + 7919)
    lib = make_template_library()
    w, h = config.compose.canvas
    bgs = [empty_background(w, h, f"holdout{i:04d}") for i in range(config.eval.holdout_scenes)]
    comp = type(comp)(**{**comp.__dict__, "renders_per_background": 1})
    return [s for s, _ in compose_dataset(bgs, lib, comp)]


# -- composition -----------------------------------------------------------------

def backgrounds_for(config: RunConfig, library):
    cc = config.compose
    w, h = cc.canvas
    if cc.mode == "synthetic":
        return [empty_background(w, h, f"bg{i:05d}") for i in range(cc.num_backgrounds)], False
    if cc.background_dataset:
        return read_dataset(cc.background_dataset), True
    return make_real_backgrounds(cc.num_backgrounds, library, seed=config.seed, width=w, height=h), True


def compose(config: RunConfig, out_dir) -> dict:
    """Write ``dataset.jsonl`` and ``compose_stats.json``; returns the stats."""
    started = time.time()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    library = make_template_library()
    backgrounds, keep_pitch = backgrounds_for(config, library)
    comp = config.compose.composition(config.seed)

    requested, placed = Counter(), Counter()
    totals = Counter()
    occ_hist = np.zeros(config.eval.num_occlusion_bins, dtype=int)

    def scenes():
        from .metrics import occlusion_bin
        for scene, st in compose_dataset(backgrounds, library, comp, keep_pitch=keep_pitch,
                                         workers=config.compose.workers):
            requested[st.requested] += 1
            placed[st.placed] += 1
            totals.update(scenes=1, requested=st.requested, placed=st.placed,
                          rejections=st.rejections, dropped=st.dropped, persons=len(scene.persons))
            for r in scene.occlusion_ratios:
                occ_hist[occlusion_bin(r, len(occ_hist))] += 1
            yield scene

    n = write_dataset(scenes(), out / "dataset.jsonl")
    stats = {
        "records": n,
        "backgrounds": len(backgrounds),
        "renders_per_background": comp.renders_per_background,
        "lambda": comp.lam,
        "mean_requested_count": totals["requested"] / n if n else 0.0,
        "mean_placed_count": totals["placed"] / n if n else 0.0,
        "requested_count_histogram": {str(k): requested[k] for k in sorted(requested)},
        "placed_count_histogram": {str(k): placed[k] for k in sorted(placed)},
        "rejections": totals["rejections"],
        "dropped": totals["dropped"],
        "persons": totals["persons"],
        "occlusion_ratio_histogram": occ_hist.tolist(),
    }
    (out / "compose_stats.json").write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n")
    _write_meta(out, "compose", config, started)
    return stats


# -- evaluation and grouping stats ---------------------------------------------------

def evaluate(config: RunConfig, predictions_path, dataset_path, out_dir) -> EvalReport:
    preds = read_predictions(predictions_path)
    scenes = read_dataset(dataset_path)
    report = match_and_score(preds, scenes, config.eval.eval_config())
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report.write(out)
    return report


def group_stats(config: RunConfig, dataset_path) -> dict:
    scenes = read_dataset(dataset_path)
    pools = build_pools(config, scenes)
    counts = [int(len(p)) for p in pools.synthetic_by_group]
    return {
        "grouping": pools.spec.to_dict(),
        "edges": [float(e) for e in pools.spec.edges],
        "synthetic_counts": counts,
        "real_samples": int(len(pools.real_pool)) if any(
            not p.is_synthetic for s in scenes for p in s.persons) else 0,
    }
