"""Scene composition: layered person silhouettes with exact z-order visibility.

Each person is a simple polygon plus 14 keypoints. Synthetic people are
stacked on top of a background scene; a keypoint is visible when it lies on
the canvas and no silhouette with a higher ``z_order`` covers it.
"""

from __future__ import annotations

import copy
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import LineString, Point
from shapely.ops import unary_union

from .geometry import is_simple_polygon, points_in_polygon, polygon_iou
from .grouping import min_distances

log = logging.getLogger(__name__)

KEYPOINT_NAMES = (
    "head_top", "neck",
    "r_shoulder", "r_elbow", "r_wrist",
    "l_shoulder", "l_elbow", "l_wrist",
    "r_hip", "r_knee", "r_ankle",
    "l_hip", "l_knee", "l_ankle",
)
NUM_KEYPOINTS = len(KEYPOINT_NAMES)
HEAD_TOP, NECK = 0, 1

# (from, to, half-width) in template units where body height is 1
_LIMBS = (
    (0, 1, 0.065), (1, 2, 0.05), (1, 5, 0.05),
    (2, 3, 0.035), (3, 4, 0.03), (5, 6, 0.035), (6, 7, 0.03),
    (2, 8, 0.07), (5, 11, 0.07), (8, 11, 0.07), (1, 8, 0.07), (1, 11, 0.07),
    (8, 9, 0.045), (9, 10, 0.035), (11, 12, 0.045), (12, 13, 0.035),
)

HEAD_SIZE_FACTOR = 0.6


@dataclass
class PersonInstance:
    keypoints: np.ndarray  # (14, 2) px
    silhouette: np.ndarray  # (V, 2) px, simple polygon
    is_synthetic: bool
    z_order: int
    reference_point: np.ndarray
    visible: np.ndarray | None = None  # (14,) bool, filled by update_visibility
    head_size: float | None = None

    def __post_init__(self):
        self.keypoints = np.asarray(self.keypoints, dtype=float).reshape(NUM_KEYPOINTS, 2)
        self.silhouette = np.asarray(self.silhouette, dtype=float).reshape(-1, 2)
        self.reference_point = np.asarray(self.reference_point, dtype=float).reshape(2)
        if self.visible is not None:
            self.visible = np.asarray(self.visible, dtype=bool).reshape(NUM_KEYPOINTS)

    def copy(self) -> "PersonInstance":
        return copy.deepcopy(self)


@dataclass
class SceneAnnotation:
    width: int
    height: int
    persons: list[PersonInstance] = field(default_factory=list)
    camera_pitch_deg: float = 0.0
    scene_id: str = ""

    @property
    def occlusion_ratios(self) -> np.ndarray:
        return np.array([visibility_ratio(self, i) for i in range(len(self.persons))])

    @property
    def min_distances(self) -> np.ndarray:
        return min_distances([p.reference_point for p in self.persons])

    def copy(self) -> "SceneAnnotation":
        return copy.deepcopy(self)


@dataclass(frozen=True)
class CompositionConfig:
    lam: float = 9.0
    max_overlap_iou: float = 0.6
    pitch_range: tuple[float, float] = (0.0, 45.0)
    renders_per_background: int = 5
    scale_range: tuple[float, float] = (120.0, 320.0)
    max_attempts: int = 100
    seed: int = 0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not 0.0 <= self.max_overlap_iou <= 1.0:
            raise ValueError("max_overlap_iou must be in [0, 1]")
        lo, hi = self.pitch_range
        if lo > hi:
            raise ValueError("pitch_range is inverted")
        if self.renders_per_background < 1:
            raise ValueError("renders_per_background must be positive")
        slo, shi = self.scale_range
        if not 0 < slo <= shi:
            raise ValueError("scale_range must satisfy 0 < lo <= hi")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be positive")


@dataclass
class ComposeStats:
    requested: int = 0
    placed: int = 0
    rejections: int = 0
    dropped: int = 0


@dataclass(frozen=True)
class PersonTemplate:
    """Normalized pose: keypoints and silhouette with body height 1, feet at y=1."""

    keypoints: np.ndarray
    silhouette: np.ndarray


# -- templates ---------------------------------------------------------------

_BASE_POSE = np.array([
    [0.0, 0.0], [0.0, 0.17],
    [-0.11, 0.2], [-0.16, 0.36], [-0.18, 0.5],
    [0.11, 0.2], [0.16, 0.36], [0.18, 0.5],
    [-0.07, 0.53], [-0.08, 0.76], [-0.08, 1.0],
    [0.07, 0.53], [0.08, 0.76], [0.08, 1.0],
])


def _rotate_about(p, center, angle):
    c, s = math.cos(angle), math.sin(angle)
    d = p - center
    return center + np.array([c * d[0] - s * d[1], s * d[0] + c * d[1]])


def _articulate(rng) -> np.ndarray:
    kp = _BASE_POSE.copy()
    # (joint, children) chains: rotate each child chain about its parent joint
    for root, chain in ((2, (3, 4)), (5, (6, 7)), (3, (4,)), (6, (7,)),
                        (8, (9, 10)), (11, (12, 13)), (9, (10,)), (12, (13,))):
        spread = 1.6 if root in (2, 5, 3, 6) else 0.5
        ang = rng.uniform(-spread, spread)
        for c in chain:
            kp[c] = _rotate_about(kp[c], kp[root], ang)
    return kp


def silhouette_from_keypoints(kp, scale: float = 1.0) -> np.ndarray:
    """Outer boundary of thickened limbs and a round head."""
    parts = [LineString([kp[a], kp[b]]).buffer(w * scale, quad_segs=4) for a, b, w in _LIMBS]
    parts.append(Point((kp[HEAD_TOP] + kp[NECK]) / 2).buffer(0.09 * scale, quad_segs=6))
    shape = unary_union(parts)
    if shape.geom_type == "MultiPolygon":
        shape = max(shape.geoms, key=lambda g: g.area)
    shape = shape.simplify(0.004 * scale, preserve_topology=True)
    ring = np.asarray(shape.exterior.coords)[:-1]
    return ring


def make_template_library(n: int = 20, seed: int = 0) -> list[PersonTemplate]:
    """Procedural humanoid templates; deterministic for a given seed."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        kp = _articulate(rng) if out else _BASE_POSE.copy()
        sil = silhouette_from_keypoints(kp)
        if is_simple_polygon(sil) and points_in_polygon(kp, sil).all():
            out.append(PersonTemplate(kp, sil))
    return out


# -- composition ---------------------------------------------------------------

def sample_count(config: CompositionConfig, rng: np.random.Generator) -> int:
    return int(rng.poisson(config.lam))


def head_size_of(keypoints) -> float:
    kp = np.asarray(keypoints, dtype=float)
    return HEAD_SIZE_FACTOR * float(np.linalg.norm(kp[HEAD_TOP] - kp[NECK]))


def _place(template: PersonTemplate, rng, config: CompositionConfig, width, height, pitch_deg, z):
    h = rng.uniform(*config.scale_range)
    squash = math.cos(math.radians(pitch_deg))
    scale = np.array([h, h * squash])
    center = np.array([rng.uniform(0, width), rng.uniform(0, height)])
    ref0 = template.keypoints.mean(axis=0)
    kp = (template.keypoints - ref0) * scale + center
    # keypoints sit on pixel centers so a 1px raster agrees with the exact test
    kp = np.floor(kp) + 0.5
    sil = np.round((template.silhouette - ref0) * scale + center, 3)
    if not points_in_polygon(kp, sil).all() or not is_simple_polygon(sil):
        return None
    p = PersonInstance(kp, sil, True, z, kp.mean(axis=0))
    p.head_size = head_size_of(kp)
    return p


def update_visibility(scene: SceneAnnotation) -> SceneAnnotation:
    """Recompute every visibility flag in place from geometry and z-order."""
    zs = [p.z_order for p in scene.persons]
    if len(set(zs)) != len(zs):
        raise ValueError("z_order values must be unique within a scene")
    for p in scene.persons:
        kp = p.keypoints
        vis = (kp[:, 0] >= 0) & (kp[:, 0] < scene.width) & (kp[:, 1] >= 0) & (kp[:, 1] < scene.height)
        for q in scene.persons:
            if q.z_order > p.z_order and vis.any():
                vis &= ~points_in_polygon(kp, q.silhouette)
        p.visible = vis
    return scene


def visibility_ratio(scene: SceneAnnotation, index: int) -> float:
    if not 0 <= index < len(scene.persons):
        raise IndexError(f"person index {index} out of range")
    p = scene.persons[index]
    if p.visible is None:
        raise ValueError("visibility not computed; call update_visibility")
    return float(np.count_nonzero(p.visible)) / NUM_KEYPOINTS


def compose_scene_with_stats(background: SceneAnnotation, library, config: CompositionConfig,
                             rng: np.random.Generator | None = None, *, keep_pitch: bool = False,
                             count: int | None = None):
    """Add ``Poisson(lam)`` synthetic people on top of ``background``.

    Placements whose silhouette IoU with an already placed synthetic person
    exceeds ``max_overlap_iou`` are retried; after ``max_attempts`` failures
    the person is dropped. The background object is not modified.
    """
    if not library:
        raise ValueError("template library is empty")
    if background.width <= 0 or background.height <= 0:
        raise ValueError("canvas has zero area")
    rng = np.random.default_rng(config.seed) if rng is None else rng
    scene = background.copy()
    if not keep_pitch:
        scene.camera_pitch_deg = float(rng.uniform(*config.pitch_range))
    stats = ComposeStats()
    k = sample_count(config, rng) if count is None else count
    stats.requested = k
    z = max((p.z_order for p in scene.persons), default=-1) + 1
    for _ in range(k):
        for _attempt in range(config.max_attempts):
            tpl = library[int(rng.integers(len(library)))]
            cand = _place(tpl, rng, config, scene.width, scene.height, scene.camera_pitch_deg, z)
            if cand is None or any(
                polygon_iou(cand.silhouette, q.silhouette) > config.max_overlap_iou
                for q in scene.persons if q.is_synthetic
            ):
                stats.rejections += 1
                continue
            scene.persons.append(cand)
            stats.placed += 1
            z += 1
            break
        else:
            stats.dropped += 1
            log.debug("dropped a person after %d attempts", config.max_attempts)
    update_visibility(scene)
    return scene, stats


def compose_scene(background, library, config, rng=None, **kw) -> SceneAnnotation:
    return compose_scene_with_stats(background, library, config, rng, **kw)[0]


def empty_background(width: int = 640, height: int = 640, scene_id: str = "") -> SceneAnnotation:
    return SceneAnnotation(width, height, [], 0.0, scene_id)


def make_real_backgrounds(n: int, library, *, lam: float = 2.0, seed: int = 0,
                          width: int = 640, height: int = 640) -> list[SceneAnnotation]:
    """Stand-in "real" backgrounds: scenes of non-synthetic people at zero pitch."""
    cfg = CompositionConfig(lam=lam, pitch_range=(0.0, 0.0), seed=seed)
    out = []
    for i in range(n):
        rng = np.random.default_rng([seed, i])
        s, _ = compose_scene_with_stats(empty_background(width, height), library, cfg, rng,
                                        count=max(1, sample_count(cfg, rng)))
        for p in s.persons:
            p.is_synthetic = False
        s.scene_id = f"bg{i:05d}"
        out.append(s)
    return out


def _compose_job(args):
    bg, library, config, index, keep_pitch = args
    rng = np.random.default_rng([config.seed, index])
    scene, stats = compose_scene_with_stats(bg, library, config, rng, keep_pitch=keep_pitch)
    base = bg.scene_id or "scene"
    scene.scene_id = f"{base}-r{index % config.renders_per_background}"
    return scene, stats


def compose_dataset(backgrounds, library, config: CompositionConfig, *, keep_pitch: bool = False,
                    workers: int = 1):
    """Yield ``(scene, stats)`` for every background rendered ``renders_per_background`` times.

    Scene ``i`` draws from its own stream seeded by ``(config.seed, i)``, so the
    output does not depend on ``workers``.
    """
    jobs = (
        (bg, library, config, i * config.renders_per_background + r, keep_pitch)
        for i, bg in enumerate(backgrounds)
        for r in range(config.renders_per_background)
    )
    if workers <= 1:
        yield from map(_compose_job, jobs)
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            yield from ex.map(_compose_job, jobs, chunksize=8)


def render_layers(scene: SceneAnnotation) -> np.ndarray:
    """Label image: 1 + index of the topmost person at each pixel center, 0 = empty."""
    ys, xs = np.mgrid[0:scene.height, 0:scene.width]
    centers = np.column_stack([xs.ravel() + 0.5, ys.ravel() + 0.5])
    label = np.zeros(len(centers), dtype=np.int32)
    for idx in np.argsort([p.z_order for p in scene.persons]):
        label[points_in_polygon(centers, scene.persons[idx].silhouette)] = idx + 1
    return label.reshape(scene.height, scene.width)


def write_pgm(path, labels: np.ndarray) -> None:
    """Binary PGM dump of a label image, values scaled to 0..255."""
    labels = np.asarray(labels)
    top = max(int(labels.max()), 1)
    img = (labels.astype(float) * (255.0 / top)).astype(np.uint8)
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode())
        f.write(img.tobytes())
