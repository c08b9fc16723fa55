"""Line-delimited JSON scene annotations.

One record per line, keys sorted, compact separators, floats in shortest
round-trip form. ``write_dataset(read_dataset(f))`` reproduces a canonical
file byte for byte.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .compositor import NUM_KEYPOINTS, PersonInstance, SceneAnnotation, update_visibility
from .geometry import is_simple_polygon, points_in_polygon
from .grouping import min_distances

SCHEMA_VERSION = 1
_TOL = 1e-9


class DatasetError(ValueError):
    def __init__(self, message: str, line: int | None = None, path=None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.line = line


def _f(x) -> float:
    return float(x)


def scene_to_record(scene: SceneAnnotation) -> dict:
    if any(p.visible is None for p in scene.persons):
        update_visibility(scene)
    dists = scene.min_distances
    persons = []
    for p, md in zip(scene.persons, dists):
        persons.append({
            "keypoints": [[_f(x), _f(y), bool(v)] for (x, y), v in zip(p.keypoints, p.visible)],
            "is_synthetic": bool(p.is_synthetic),
            "z_order": int(p.z_order),
            "reference_point": [_f(c) for c in p.reference_point],
            "silhouette": [[_f(x), _f(y)] for x, y in p.silhouette],
            "head_size": None if p.head_size is None else _f(p.head_size),
            "min_distance_px": _f(md),
            "occlusion_ratio": float(np.count_nonzero(p.visible)) / NUM_KEYPOINTS,
        })
    return {
        "schema_version": SCHEMA_VERSION,
        "scene_id": str(scene.scene_id),
        "canvas": [int(scene.width), int(scene.height)],
        "camera_pitch_deg": _f(scene.camera_pitch_deg),
        "persons": persons,
    }


def _finite(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DatasetError(f"{field}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise DatasetError(f"{field}: non-finite value {value!r}")
    return float(value)


def _point(value, field: str, n: int = 2) -> list[float]:
    if not isinstance(value, list) or len(value) != n:
        raise DatasetError(f"{field}: expected a list of {n} numbers")
    return [_finite(v, f"{field}[{i}]") for i, v in enumerate(value)]


def record_to_scene(rec: dict, *, verify: bool = True) -> SceneAnnotation:
    """Parse and validate one record; derived fields are checked against raw ones."""
    if not isinstance(rec, dict):
        raise DatasetError("record is not a JSON object")
    version = rec.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DatasetError(f"schema_version: unsupported value {version!r}")
    for key in ("scene_id", "canvas", "camera_pitch_deg", "persons"):
        if key not in rec:
            raise DatasetError(f"{key}: missing")
    canvas = rec["canvas"]
    if (not isinstance(canvas, list) or len(canvas) != 2
            or not all(isinstance(c, int) and not isinstance(c, bool) and c > 0 for c in canvas)):
        raise DatasetError("canvas: expected [width, height] positive integers")
    pitch = _finite(rec["camera_pitch_deg"], "camera_pitch_deg")
    if not isinstance(rec["persons"], list):
        raise DatasetError("persons: expected a list")

    persons, derived = [], []
    for i, pr in enumerate(rec["persons"]):
        base = f"persons[{i}]"
        if not isinstance(pr, dict):
            raise DatasetError(f"{base}: expected an object")
        kps = pr.get("keypoints")
        if not isinstance(kps, list) or len(kps) != NUM_KEYPOINTS:
            raise DatasetError(f"{base}.keypoints: expected {NUM_KEYPOINTS} entries")
        xy, vis = [], []
        for k, kp in enumerate(kps):
            f = f"{base}.keypoints[{k}]"
            if not isinstance(kp, list) or len(kp) != 3 or not isinstance(kp[2], bool):
                raise DatasetError(f"{f}: expected [x, y, visible]")
            xy.append(_point(kp[:2], f))
            vis.append(kp[2])
        sil = pr.get("silhouette")
        if not isinstance(sil, list) or len(sil) < 3:
            raise DatasetError(f"{base}.silhouette: expected at least 3 vertices")
        sil = [_point(v, f"{base}.silhouette[{j}]") for j, v in enumerate(sil)]
        if not isinstance(pr.get("is_synthetic"), bool):
            raise DatasetError(f"{base}.is_synthetic: expected a boolean")
        z = pr.get("z_order")
        if not isinstance(z, int) or isinstance(z, bool):
            raise DatasetError(f"{base}.z_order: expected an integer")
        head = pr.get("head_size")
        if head is not None:
            head = _finite(head, f"{base}.head_size")
            if head <= 0:
                raise DatasetError(f"{base}.head_size: must be positive")
        ref = _point(pr.get("reference_point"), f"{base}.reference_point")
        p = PersonInstance(np.array(xy), np.array(sil), pr["is_synthetic"], z, np.array(ref),
                           np.array(vis, dtype=bool), head)
        if verify:
            if not is_simple_polygon(p.silhouette):
                raise DatasetError(f"{base}.silhouette: not a simple polygon")
            if not points_in_polygon(p.keypoints, p.silhouette).all():
                raise DatasetError(f"{base}.keypoints: outside the person's silhouette")
        persons.append(p)
        derived.append((_finite(pr.get("min_distance_px"), f"{base}.min_distance_px"),
                        _finite(pr.get("occlusion_ratio"), f"{base}.occlusion_ratio")))

    zs = [p.z_order for p in persons]
    if len(set(zs)) != len(zs):
        raise DatasetError("persons: z_order values must be unique")
    scene = SceneAnnotation(canvas[0], canvas[1], persons, pitch, str(rec["scene_id"]))
    if verify:
        stored = [p.visible.copy() for p in persons]
        update_visibility(scene)
        for i, (p, v) in enumerate(zip(persons, stored)):
            if not np.array_equal(p.visible, v):
                raise DatasetError(f"persons[{i}].keypoints: visibility flags disagree with z-order geometry")
        for i, ((md, occ), md_true) in enumerate(zip(derived, min_distances([p.reference_point for p in persons]))):
            if abs(md - md_true) > _TOL * max(1.0, md_true):
                raise DatasetError(f"persons[{i}].min_distance_px: stored {md!r}, recomputed {md_true!r}")
            occ_true = float(np.count_nonzero(persons[i].visible)) / NUM_KEYPOINTS
            if abs(occ - occ_true) > _TOL:
                raise DatasetError(f"persons[{i}].occlusion_ratio: stored {occ!r}, recomputed {occ_true!r}")
    return scene


def dumps_record(rec: dict) -> str:
    return json.dumps(rec, sort_keys=True, separators=(",", ":"), allow_nan=False)


def iter_dataset(path, *, verify: bool = True) -> Iterator[SceneAnnotation]:
    path = Path(path)
    with path.open("r", encoding="utf-8") as f:
        for n, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetError(f"malformed JSON ({e.msg})", n, path) from None
            try:
                yield record_to_scene(rec, verify=verify)
            except DatasetError as e:
                raise DatasetError(str(e), n, path) from None


def read_dataset(path, *, verify: bool = True) -> list[SceneAnnotation]:
    return list(iter_dataset(path, verify=verify))


def write_dataset(scenes: Iterable[SceneAnnotation | dict], path) -> int:
    """Stream scenes (or ready records) to ``path``; returns the record count."""
    path = Path(path)
    n = 0
    try:
        with path.open("w", encoding="utf-8", newline="\n") as f:
            for s in scenes:
                rec = s if isinstance(s, dict) else scene_to_record(s)
                f.write(dumps_record(rec) + "\n")
                n += 1
    except OSError as e:
        raise OSError(f"{path}: {e.strerror or e}") from e
    return n
