"""Spatial-relation predicates over scene objects.

These are the ground-truth rules the question generators and the rule
reasoner share, so their tie-breaks are part of the contract: ``nearest``
treats distances within 1e-9 m as equal and resolves ties to the lowest
object_id.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ..rotation import euler_to_matrix
from ..scene import AnnotatedObject, Box3D, Scene

DISTANCE_TIE_TOL = 1e-9


def center_distance(a: Box3D, b: Box3D) -> float:
    return math.dist(a.center, b.center)


def nearest(
    anchor: AnnotatedObject,
    scene: Scene,
    category: Optional[str] = None,
    exclude_ids: tuple[int, ...] = (),
) -> Optional[AnnotatedObject]:
    """The scene object closest to ``anchor`` by center distance.

    The anchor itself is never a candidate; ``category`` restricts candidates
    when given.  Returns None when no candidate matches.
    """
    skip = set(exclude_ids)
    skip.add(anchor.object_id)
    candidates = [
        obj
        for obj in scene.objects
        if obj.object_id not in skip and (category is None or obj.category == category)
    ]
    if not candidates:
        return None
    dists = {obj.object_id: center_distance(anchor.box, obj.box) for obj in candidates}
    dmin = min(dists.values())
    tied = [obj for obj in candidates if dists[obj.object_id] <= dmin + DISTANCE_TIE_TOL]
    return min(tied, key=lambda obj: obj.object_id)


def nearest_point(
    point,
    scene: Scene,
    category: Optional[str] = None,
    exclude_ids: tuple[int, ...] = (),
) -> Optional[AnnotatedObject]:
    """Like ``nearest`` but anchored at a raw 3D point."""
    skip = set(exclude_ids)
    candidates = [
        obj
        for obj in scene.objects
        if obj.object_id not in skip and (category is None or obj.category == category)
    ]
    if not candidates:
        return None
    dists = {obj.object_id: math.dist(point, obj.box.center) for obj in candidates}
    dmin = min(dists.values())
    tied = [obj for obj in candidates if dists[obj.object_id] <= dmin + DISTANCE_TIE_TOL]
    return min(tied, key=lambda obj: obj.object_id)


def _hull(box: Box3D):
    r = euler_to_matrix(*box.euler)
    half = 0.5 * np.abs(r) @ np.asarray(box.size)
    c = np.asarray(box.center)
    return c - half, c + half


def is_above(a: Box3D, b: Box3D) -> bool:
    """True when a sits above b: xy hulls overlap and a's bottom clears b's top.

    A 1e-6 m slack admits resting contact (a placed directly on b).
    """
    amin, amax = _hull(a)
    bmin, bmax = _hull(b)
    for axis in (0, 1):
        if min(amax[axis], bmax[axis]) - max(amin[axis], bmin[axis]) <= DISTANCE_TIE_TOL:
            return False
    return amin[2] >= bmax[2] - 1e-6


def is_near(a: Box3D, b: Box3D, radius: float) -> bool:
    return center_distance(a, b) <= radius


def contains(a: Box3D, b: Box3D, tol: float = 1e-9) -> bool:
    """True when every corner of b lies inside a."""
    r = euler_to_matrix(*a.euler)
    rb = euler_to_matrix(*b.euler)
    half_a = np.asarray(a.size) / 2.0
    half_b = np.asarray(b.size) / 2.0
    signs = np.array(
        [[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], dtype=float
    )
    corners_b = np.asarray(b.center) + (signs * half_b) @ rb.T
    local = (corners_b - np.asarray(a.center)) @ r
    return bool(np.all(np.abs(local) <= half_a + tol))
