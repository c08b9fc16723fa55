"""Occlusion-binned keypoint evaluation with greedy person matching.

This is a PCKh-style correctness rate rather than the full MPII AP protocol:
a predicted keypoint is correct when it lies within ``pckh_threshold`` times
the ground-truth head size of the true location. Ground-truth people are
matched one-to-one to predictions, greedily by number of correct keypoints,
then binned by their ratio of visible keypoints.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .compositor import KEYPOINT_NAMES, NUM_KEYPOINTS, SceneAnnotation

METRIC_NOTE = ("PCKh-style keypoint correctness with greedy one-to-one person matching, "
               "binned by ratio of visible keypoints; not the MPII AP protocol")


class EvalError(ValueError):
    pass


@dataclass(frozen=True)
class EvalConfig:
    num_occlusion_bins: int = 5
    pckh_threshold: float = 0.5
    real_only: bool = False

    def __post_init__(self):
        if self.num_occlusion_bins < 1:
            raise ValueError("num_occlusion_bins must be >= 1")
        if not self.pckh_threshold > 0:
            raise ValueError("pckh_threshold must be positive")


@dataclass
class EvalReport:
    bin_edges: list[float]
    bin_counts: list[int]
    bin_scores: list[float | None]
    joint_scores: list[float]
    overall: float
    num_persons: int
    note: str = METRIC_NOTE
    person_scores: list[float] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "note": self.note,
            "num_persons": self.num_persons,
            "overall": self.overall,
            "bins": [
                {"bin": i, "lower": self.bin_edges[i], "upper": self.bin_edges[i + 1],
                 "count": c, "score": s}
                for i, (c, s) in enumerate(zip(self.bin_counts, self.bin_scores))
            ],
            "joints": dict(zip(KEYPOINT_NAMES, self.joint_scores)),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin", "lower", "upper", "count", "score"])
        for i, (c, s) in enumerate(zip(self.bin_counts, self.bin_scores)):
            w.writerow([i, self.bin_edges[i], self.bin_edges[i + 1], c, "" if s is None else s])
        return buf.getvalue()

    def write(self, out_dir, stem: str = "report") -> None:
        out = Path(out_dir)
        (out / f"{stem}.json").write_text(self.to_json())
        (out / f"{stem}.csv").write_text(self.to_csv())


def occlusion_bin(ratio: float, num_bins: int) -> int:
    """``floor(ratio * num_bins)``, with ``ratio == 1`` in the last bin."""
    r = float(ratio)
    if not 0.0 <= r <= 1.0:
        raise EvalError(f"visibility ratio {ratio!r} outside [0, 1]")
    return min(int(math.floor(r * num_bins)), num_bins - 1)


def keypoint_correct(pred, gt, head_size: float, threshold: float) -> np.ndarray:
    d = np.linalg.norm(np.asarray(pred, float) - np.asarray(gt, float), axis=1)
    return d <= threshold * head_size


def greedy_match(gt_keypoints, gt_heads, pred_keypoints, threshold: float):
    """Return ``{gt_index: (pred_index, correct_mask)}``.

    Pairs are taken in order of decreasing correct-keypoint count, ties broken
    by ground-truth then prediction index. Pairs with no correct keypoint are
    never matched.
    """
    table = []
    for i, (g, h) in enumerate(zip(gt_keypoints, gt_heads)):
        for j, p in enumerate(pred_keypoints):
            ok = keypoint_correct(p, g, h, threshold)
            if ok.any():
                table.append((-int(ok.sum()), i, j, ok))
    table.sort(key=lambda t: t[:3])
    used_gt, used_pred, out = set(), set(), {}
    for _, i, j, ok in table:
        if i in used_gt or j in used_pred:
            continue
        used_gt.add(i)
        used_pred.add(j)
        out[i] = (j, ok)
    return out


def _normalize_predictions(predictions) -> dict[str, list[np.ndarray]]:
    if isinstance(predictions, dict):
        items = predictions.items()
    else:
        items = predictions
    out: dict[str, list[np.ndarray]] = {}
    for sid, persons in items:
        if sid in out:
            raise EvalError(f"duplicate prediction id {sid!r}")
        arrs = []
        for k, kp in enumerate(persons):
            a = np.asarray(kp, dtype=float)
            if a.shape != (NUM_KEYPOINTS, 2) or not np.all(np.isfinite(a)):
                raise EvalError(f"prediction {sid!r} person {k}: expected {NUM_KEYPOINTS} finite (x, y) pairs")
            arrs.append(a)
        out[sid] = arrs
    return out


def match_and_score(predictions, ground_truth: list[SceneAnnotation], config: EvalConfig = EvalConfig()) -> EvalReport:
    preds = _normalize_predictions(predictions)
    gt_ids = [s.scene_id for s in ground_truth]
    if len(set(gt_ids)) != len(gt_ids):
        raise EvalError("duplicate scene ids in ground truth")
    unknown = sorted(set(preds) - set(gt_ids))
    if unknown:
        raise EvalError("predictions reference unknown scene ids: " + ", ".join(map(repr, unknown)))

    nb = config.num_occlusion_bins
    per_bin: list[list[float]] = [[] for _ in range(nb)]
    joint_hits = np.zeros(NUM_KEYPOINTS)
    scores = []
    for scene in ground_truth:
        persons = [p for p in scene.persons if not (config.real_only and p.is_synthetic)]
        for k, p in enumerate(persons):
            if p.head_size is None:
                raise EvalError(f"scene {scene.scene_id!r} person {k}: missing head size")
            if p.visible is None:
                raise EvalError(f"scene {scene.scene_id!r} person {k}: visibility not computed")
        matches = greedy_match([p.keypoints for p in persons], [p.head_size for p in persons],
                               preds.get(scene.scene_id, []), config.pckh_threshold)
        for i, p in enumerate(persons):
            ok = matches[i][1] if i in matches else np.zeros(NUM_KEYPOINTS, dtype=bool)
            score = float(ok.sum()) / NUM_KEYPOINTS
            joint_hits += ok
            scores.append(score)
            ratio = float(np.count_nonzero(p.visible)) / NUM_KEYPOINTS
            per_bin[occlusion_bin(ratio, nb)].append(score)

    n = len(scores)
    return EvalReport(
        bin_edges=[i / nb for i in range(nb + 1)],
        bin_counts=[len(b) for b in per_bin],
        bin_scores=[float(np.mean(b)) if b else None for b in per_bin],
        joint_scores=[float(h / n) if n else 0.0 for h in joint_hits],
        overall=float(np.mean(scores)) if n else 0.0,
        num_persons=n,
        person_scores=scores,
    )


def read_predictions(path) -> list[tuple[str, list[np.ndarray]]]:
    """JSONL of ``{"scene_id": ..., "persons": [[[x, y], ...], ...]}``."""
    out, seen = [], set()
    with Path(path).open() as f:
        for n, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                sid = rec["scene_id"]
                persons = [np.asarray(p, dtype=float) for p in rec["persons"]]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise EvalError(f"{path}: line {n}: malformed prediction record ({e})") from None
            if sid in seen:
                raise EvalError(f"{path}: line {n}: duplicate prediction id {sid!r}")
            seen.add(sid)
            out.append((sid, persons))
    return out


def write_predictions(predictions, path) -> None:
    with Path(path).open("w", newline="\n") as f:
        for sid, persons in (predictions.items() if isinstance(predictions, dict) else predictions):
            rec = {"scene_id": sid, "persons": [np.asarray(p, float).tolist() for p in persons]}
            f.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")
