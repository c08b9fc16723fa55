"""Polygon predicates used for visibility and overlap checks."""

from __future__ import annotations

import numpy as np
from shapely.geometry import Polygon


def points_in_polygon(points, polygon) -> np.ndarray:
    """Even-odd crossing test for many points against one simple polygon."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    poly = np.asarray(polygon, dtype=float).reshape(-1, 2)
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    x1, y1 = poly[:, 0], poly[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
    for ax, ay, bx, by in zip(x1, y1, x2, y2):
        crosses = (ay > y) != (by > y)
        if not crosses.any():
            continue
        xint = ax + (y[crosses] - ay) * (bx - ax) / (by - ay)
        hit = np.zeros_like(inside)
        hit[crosses] = x[crosses] < xint
        inside ^= hit
    return inside


def point_in_polygon(point, polygon) -> bool:
    return bool(points_in_polygon([point], polygon)[0])


def is_simple_polygon(polygon) -> bool:
    poly = np.asarray(polygon, dtype=float)
    if poly.ndim != 2 or poly.shape[0] < 3 or poly.shape[1] != 2:
        return False
    shp = Polygon(poly)
    return bool(shp.is_valid and shp.exterior.is_simple and shp.area > 0)


def polygon_area(polygon) -> float:
    p = np.asarray(polygon, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def polygon_iou(a, b) -> float:
    pa, pb = Polygon(np.asarray(a, dtype=float)), Polygon(np.asarray(b, dtype=float))
    if not pa.intersects(pb):
        return 0.0
    inter = pa.intersection(pb).area
    union = pa.area + pb.area - inter
    return float(inter / union) if union > 0 else 0.0


def bbox(polygon) -> tuple[float, float, float, float]:
    p = np.asarray(polygon, dtype=float)
    return float(p[:, 0].min()), float(p[:, 1].min()), float(p[:, 0].max()), float(p[:, 1].max())
